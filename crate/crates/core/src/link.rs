//! End-to-end link evaluation: mode, laser power, receiver.

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::Result;
use crate::mode::{fox_li_solve, ModeSummary};
use crate::power::{channel_gain, power_budget, DriveMode, PowerBudget};
use crate::receiver::{receiver_metrics, ReceiverMetrics};

/// One evaluated operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub distance: f64,
    /// θ (rad).
    pub theta: f64,
    pub mode: ModeSummary,
    pub budget: PowerBudget,
    /// Channel gain γ (A/A).
    pub gamma: f64,
    pub receiver: ReceiverMetrics,
}

impl LinkMetrics {
    pub fn p_out(&self) -> f64 {
        self.budget.p_out
    }

    /// Charging power P_pv,o (W).
    pub fn p_pv_out(&self) -> f64 {
        self.receiver.pv.power
    }

    /// Achievable rate R_a (bit/s).
    pub fn rate(&self) -> f64 {
        self.receiver.rate
    }

    pub fn below_threshold(&self) -> bool {
        self.budget.below_threshold
    }
}

/// Metrics for a solved mode at distance `distance` and angle `theta`.
pub fn link_metrics_for_mode(
    config: &SystemConfig,
    distance: f64,
    theta: f64,
    mode: &ModeSummary,
    drive: DriveMode,
    mu: f64,
) -> Result<LinkMetrics> {
    let budget = power_budget(drive, mode, &config.gain_medium, config.resonator.reflectivity)?;
    let gamma = channel_gain(
        budget.eta_extr,
        !budget.below_threshold,
        &config.gain_medium,
        config.apd.responsivity,
    );
    let receiver = receiver_metrics(budget.p_out, gamma, mu, &config.pv, &config.apd)?;
    Ok(LinkMetrics {
        distance,
        theta,
        mode: *mode,
        budget,
        gamma,
        receiver,
    })
}

/// Metrics at the operating point in `config.link`, solving the mode.
pub fn link_metrics(config: &SystemConfig) -> Result<LinkMetrics> {
    config.validate()?;
    let theta = config.link.theta_deg.to_radians();
    let cavity = config.cavity(config.link.distance, theta);
    let mode = fox_li_solve(&cavity)?.summary();
    link_metrics_for_mode(
        config,
        config.link.distance,
        theta,
        &mode,
        config.link.drive_mode(),
        config.link.split_ratio,
    )
}
