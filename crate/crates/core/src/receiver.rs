//! Receiver: the PV/APD power split, APD noise, and the OFDM achievable rate.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, ELECTRON_CHARGE};
use crate::error::{Error, Result};
use crate::pv::{solve_pv_operating_point, PvOperatingPoint, PvParams};

/// Default background power on the APD (W).
pub const DEFAULT_BACKGROUND_POWER: f64 = 9.56e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApdParams {
    /// Responsivity ρ2 (A/W).
    pub responsivity: f64,
    /// Modulation bandwidth W (Hz).
    pub bandwidth: f64,
    /// OFDM subcarriers N.
    pub subcarriers: u32,
    /// Load resistor R_L,pd (Ω).
    pub load_resistance: f64,
    /// DC-bias scaling η.
    pub dc_bias_factor: f64,
    /// Signal variance ε.
    pub signal_variance: f64,
    /// Background optical power P_b (W).
    pub background_power: f64,
    pub temperature: f64,
}

impl Default for ApdParams {
    fn default() -> Self {
        Self {
            responsivity: 0.6,
            bandwidth: 200e6,
            subcarriers: 64,
            load_resistance: 1e4,
            dc_bias_factor: 3.0,
            signal_variance: 1.0,
            background_power: DEFAULT_BACKGROUND_POWER,
            temperature: 298.15,
        }
    }
}

impl ApdParams {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("apd.responsivity", self.responsivity),
            ("apd.bandwidth", self.bandwidth),
            ("apd.load_resistance", self.load_resistance),
            ("apd.dc_bias_factor", self.dc_bias_factor),
            ("apd.signal_variance", self.signal_variance),
            ("apd.temperature", self.temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.background_power >= 0.0) {
            return Err(Error::validation("apd.background_power", "must be non-negative"));
        }
        if self.subcarriers < 4 || self.subcarriers % 2 != 0 {
            return Err(Error::validation(
                "apd.subcarriers",
                format!("must be even and at least 4, got {}", self.subcarriers),
            ));
        }
        Ok(())
    }
}

/// Background power from its physical factors: `H_b·B_IF·A_Rx·Φ_Rx²·Γ·η_Rx`,
/// with the field of view Φ_Rx in radians.
pub fn background_power(
    irradiance: f64,
    filter_bandwidth: f64,
    aperture_area: f64,
    field_of_view: f64,
    concentrator_gain: f64,
    filter_efficiency: f64,
) -> f64 {
    irradiance * filter_bandwidth * aperture_area * field_of_view.powi(2) * concentrator_gain * filter_efficiency
}

/// Split P_out into (PV, APD) shares `(μ·P_out, (1-μ)·P_out)`.
pub fn split_power(p_out: f64, mu: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::validation("link.split_ratio", format!("must lie in [0, 1], got {mu}")));
    }
    let pv = mu * p_out;
    Ok((pv, p_out - pv))
}

/// Shot, thermal and total noise PSDs (A²/Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePsd {
    pub shot: f64,
    pub thermal: f64,
    pub total: f64,
}

pub fn noise_psd(p_pd: f64, params: &ApdParams) -> NoisePsd {
    let shot = 2.0 * ELECTRON_CHARGE * params.responsivity * (p_pd.max(0.0) + params.background_power);
    let thermal = 4.0 * BOLTZMANN * params.temperature / params.load_resistance;
    NoisePsd {
        shot,
        thermal,
        total: shot + thermal,
    }
}

/// Per-subcarrier signal power `E_k = 2ε/(η²(N-2))`.
pub fn subcarrier_signal_power(params: &ApdParams) -> Result<f64> {
    if params.subcarriers <= 2 {
        return Err(Error::validation("apd.subcarriers", "must exceed 2"));
    }
    Ok(2.0 * params.signal_variance
        / (params.dc_bias_factor.powi(2) * (params.subcarriers - 2) as f64))
}

/// SNR on each data subcarrier and the total rate (bit/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub snr: Vec<f64>,
    pub rate: f64,
}

/// Flat-channel SNR and Shannon rate over the `N/2 - 1` data subcarriers.
pub fn snr_and_rate(gamma: f64, mu: f64, params: &ApdParams, p_pd: f64) -> Result<RateResult> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::validation("link.split_ratio", format!("must lie in [0, 1], got {mu}")));
    }
    let e_k = subcarrier_signal_power(params)?;
    let n = params.subcarriers as f64;
    let sigma2 = noise_psd(p_pd, params).total * params.bandwidth / n;
    let snr_k = (1.0 - mu) * gamma * gamma * e_k / sigma2;
    let data = (params.subcarriers / 2 - 1) as usize;
    let snr = vec![snr_k; data];
    let rate = snr
        .iter()
        .map(|s| params.bandwidth / n * (1.0 + s).log2())
        .sum();
    Ok(RateResult { snr, rate })
}

/// Everything the receiver delivers for one link state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverMetrics {
    pub mu: f64,
    pub p_pv_in: f64,
    pub p_pd: f64,
    pub pv: PvOperatingPoint,
    pub noise: NoisePsd,
    pub snr: f64,
    pub rate: f64,
}

/// Receiver stage of the link for output power `p_out` and gain `gamma`.
pub fn receiver_metrics(
    p_out: f64,
    gamma: f64,
    mu: f64,
    pv: &PvParams,
    apd: &ApdParams,
) -> Result<ReceiverMetrics> {
    let (p_pv_in, p_pd) = split_power(p_out, mu)?;
    let op = solve_pv_operating_point(p_pv_in, pv)?;
    let rate = snr_and_rate(gamma, mu, apd, p_pd)?;
    Ok(ReceiverMetrics {
        mu,
        p_pv_in,
        p_pd,
        pv: op,
        noise: noise_psd(p_pd, apd),
        snr: rate.snr.first().copied().unwrap_or(0.0),
        rate: rate.rate,
    })
}
