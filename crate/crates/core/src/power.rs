//! Quasi-static laser power budget from electrical drive to output beam.

use serde::{Deserialize, Serialize};

use crate::constants::photon_voltage;
use crate::error::{Error, Result};
use crate::mode::ModeSummary;

/// Gain medium and pump diode parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainMediumParams {
    /// Saturated intensity I_s (W/m²).
    pub saturated_intensity: f64,
    /// Internal loss factor V_s.
    pub internal_loss: f64,
    /// η_excit = η_a·η_P.
    pub excitation_efficiency: f64,
    /// η_a.
    pub gain_stored_efficiency: f64,
    /// η_ν·η_e of the pump diode.
    pub injection_extraction_efficiency: f64,
    /// Pump emission wavelength λ_e (m).
    pub emission_wavelength: f64,
    /// Pump diode threshold current I_th (A).
    pub threshold_current: f64,
}

impl Default for GainMediumParams {
    fn default() -> Self {
        Self {
            saturated_intensity: 1.26e7,
            internal_loss: 0.99,
            excitation_efficiency: 0.5148,
            gain_stored_efficiency: 0.72,
            injection_extraction_efficiency: 0.715,
            emission_wavelength: 808e-9,
            threshold_current: 0.5,
        }
    }
}

impl GainMediumParams {
    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("gain_medium.internal_loss", self.internal_loss),
            ("gain_medium.excitation_efficiency", self.excitation_efficiency),
            ("gain_medium.gain_stored_efficiency", self.gain_stored_efficiency),
            (
                "gain_medium.injection_extraction_efficiency",
                self.injection_extraction_efficiency,
            ),
        ];
        for (field, v) in unit {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(field, format!("must lie in (0, 1], got {v}")));
            }
        }
        for (field, v) in [
            ("gain_medium.saturated_intensity", self.saturated_intensity),
            ("gain_medium.emission_wavelength", self.emission_wavelength),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.threshold_current >= 0.0) {
            return Err(Error::validation(
                "gain_medium.threshold_current",
                "must be non-negative",
            ));
        }
        if self.excitation_efficiency > self.gain_stored_efficiency {
            return Err(Error::validation(
                "gain_medium.excitation_efficiency",
                "cannot exceed gain_stored_efficiency",
            ));
        }
        Ok(())
    }

    /// Pump transfer efficiency η_P = η_excit / η_a.
    pub fn pump_efficiency(&self) -> f64 {
        self.excitation_efficiency / self.gain_stored_efficiency
    }
}

/// How the transmitter is driven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum DriveMode {
    /// Electrical input power P_in (W).
    Power(f64),
    /// Pump diode current I_in (A).
    Current(f64),
}

/// Every stage of the power chain for one operating point (W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    /// Electrical input. In current mode this is the input that would give
    /// the same pump power, `P_pump / η_P`.
    pub p_in: f64,
    pub p_pump: f64,
    pub p_avail: f64,
    pub eta_diff: f64,
    pub eta_extr: f64,
    pub c1: f64,
    pub p_out: f64,
    pub below_threshold: bool,
}

/// Pump optical power from diode current, zero below threshold.
pub fn pump_power(current: f64, params: &GainMediumParams) -> f64 {
    photon_voltage(params.emission_wavelength)
        * params.injection_extraction_efficiency
        * (current - params.threshold_current).max(0.0)
}

/// Power stored in the upper laser level, `η_a·P_pump`.
pub fn available_power(p_pump: f64, params: &GainMediumParams) -> f64 {
    params.gain_stored_efficiency * p_pump.max(0.0)
}

/// η_diff = √(V1·V2); zero for a closed channel.
pub fn diffraction_loss(v1: f64, v2: f64) -> f64 {
    if v1 > 0.0 && v2 > 0.0 {
        (v1 * v2).sqrt()
    } else {
        0.0
    }
}

fn extraction_parts(mode: &ModeSummary, reflectivity: f64, internal_loss: f64) -> Result<(f64, f64)> {
    let (v1, eta_b) = (mode.v1, mode.overlap_efficiency);
    let eta_diff = diffraction_loss(mode.v1, mode.v2);
    let denom = 1.0 - eta_diff * eta_diff * reflectivity
        + eta_diff * reflectivity.sqrt() * (1.0 / (internal_loss * v1) - internal_loss);
    let numer = eta_b * (1.0 - reflectivity) * v1;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::ModelOutOfRange(format!(
            "extraction-efficiency denominator {denom:.3e} is not positive"
        )));
    }
    Ok((numer, denom))
}

/// η_extr for a solved mode. A closed mode has η_extr = 0.
pub fn extraction_efficiency(mode: &ModeSummary, reflectivity: f64, internal_loss: f64) -> Result<f64> {
    if mode.closed || mode.v1 <= 0.0 || mode.v2 <= 0.0 {
        return Ok(0.0);
    }
    let (numer, denom) = extraction_parts(mode, reflectivity, internal_loss)?;
    Ok(numer / denom)
}

/// Lasing threshold c1 = A_g·I_s·|ln √(R·V_s²·V1·V2)| (W). Infinite for a
/// closed channel.
pub fn threshold_power(mode: &ModeSummary, reflectivity: f64, params: &GainMediumParams) -> f64 {
    let arg = reflectivity * params.internal_loss.powi(2) * mode.v1 * mode.v2;
    if !(arg > 0.0) {
        return f64::INFINITY;
    }
    mode.gain_area * params.saturated_intensity * arg.sqrt().ln().abs()
}

/// Full power chain for one drive setting.
pub fn power_budget(
    drive: DriveMode,
    mode: &ModeSummary,
    params: &GainMediumParams,
    reflectivity: f64,
) -> Result<PowerBudget> {
    let (p_in, p_pump) = match drive {
        DriveMode::Power(p) => {
            if !(p >= 0.0) {
                return Err(Error::validation("link.input_power", "must be non-negative"));
            }
            (p, params.pump_efficiency() * p)
        }
        DriveMode::Current(i) => {
            if !(i >= 0.0) {
                return Err(Error::validation("link.input_current", "must be non-negative"));
            }
            let pump = pump_power(i, params);
            (pump / params.pump_efficiency(), pump)
        }
    };
    // In power mode η_excit·P_in is formed directly so that the threshold
    // test matches η_excit·P_in <= c1 exactly.
    let p_avail = match drive {
        DriveMode::Power(p) => params.excitation_efficiency * p,
        DriveMode::Current(_) => available_power(p_pump, params),
    };
    let eta_diff = diffraction_loss(mode.v1, mode.v2);
    let eta_extr = extraction_efficiency(mode, reflectivity, params.internal_loss)?;
    let c1 = threshold_power(mode, reflectivity, params);
    let below = !(p_avail > c1) || eta_extr <= 0.0;
    let p_out = if below { 0.0 } else { eta_extr * (p_avail - c1) };
    Ok(PowerBudget {
        p_in,
        p_pump,
        p_avail,
        eta_diff,
        eta_extr,
        c1,
        p_out,
        below_threshold: below,
    })
}

/// P_out = max(η_extr(η_excit·P_in − c1), 0).
pub fn output_power(
    p_in: f64,
    mode: &ModeSummary,
    params: &GainMediumParams,
    reflectivity: f64,
) -> Result<f64> {
    Ok(power_budget(DriveMode::Power(p_in), mode, params, reflectivity)?.p_out)
}

/// The same output power written with the overlap area A_b = η_b·A_g and
/// the loss product V1·V2 kept unfactored.
pub fn output_power_direct(
    p_in: f64,
    mode: &ModeSummary,
    params: &GainMediumParams,
    reflectivity: f64,
) -> Result<f64> {
    if mode.closed || mode.v1 <= 0.0 || mode.v2 <= 0.0 {
        return Ok(0.0);
    }
    let (r, vs, v1, v2) = (reflectivity, params.internal_loss, mode.v1, mode.v2);
    let a_g = mode.gain_area;
    let a_b = mode.overlap_efficiency * a_g;
    let i_s = params.saturated_intensity;
    let denom = 1.0 - r * v1 * v2 + (r * v1 * v2).sqrt() * (1.0 / (vs * v1) - vs);
    if !(denom > 0.0) {
        return Err(Error::ModelOutOfRange(format!(
            "output-power denominator {denom:.3e} is not positive"
        )));
    }
    let drive = params.excitation_efficiency * p_in / (a_g * i_s)
        - (r * vs * vs * v1 * v2).sqrt().ln().abs();
    Ok((a_b * i_s * (1.0 - r) * v1 / denom * drive).max(0.0))
}

/// Small-signal channel gain γ = ρ2·η_extr·η_a·η_ν·η_e·hc/(qλ_e) (A/A).
/// Zero when the laser is not running.
pub fn channel_gain(eta_extr: f64, lasing: bool, params: &GainMediumParams, rho2: f64) -> f64 {
    if !lasing {
        return 0.0;
    }
    rho2 * eta_extr
        * params.gain_stored_efficiency
        * params.injection_extraction_efficiency
        * photon_voltage(params.emission_wavelength)
}
