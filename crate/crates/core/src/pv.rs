//! Single-diode photovoltaic panel at its maximum power point.

use serde::{Deserialize, Serialize};

use crate::constants::thermal_voltage;
use crate::error::{Error, Result};

/// Current residual accepted by the inner I(V) solve (A).
pub const CURRENT_TOLERANCE: f64 = 1e-12;

const COARSE_POINTS: usize = 64;
const GOLDEN_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvParams {
    /// Conversion responsivity ρ1 (A/W).
    pub responsivity: f64,
    /// Reverse saturation current I0 (A).
    pub saturation_current: f64,
    /// Diode ideality factor n.
    pub ideality: f64,
    /// Cells in series n_s.
    pub cells_in_series: u32,
    /// Series resistance R_s (Ω).
    pub series_resistance: f64,
    /// Shunt resistance R_sh (Ω).
    pub shunt_resistance: f64,
    /// Panel temperature (K).
    pub temperature: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        Self {
            responsivity: 0.746,
            saturation_current: 9.381e-9,
            ideality: 1.318,
            cells_in_series: 1,
            series_resistance: 0.025,
            shunt_resistance: 5000.0,
            temperature: 298.15,
        }
    }
}

impl PvParams {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("pv.responsivity", self.responsivity),
            ("pv.saturation_current", self.saturation_current),
            ("pv.ideality", self.ideality),
            ("pv.shunt_resistance", self.shunt_resistance),
            ("pv.temperature", self.temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.series_resistance >= 0.0) {
            return Err(Error::validation("pv.series_resistance", "must be non-negative"));
        }
        if self.cells_in_series == 0 {
            return Err(Error::validation("pv.cells_in_series", "must be at least 1"));
        }
        Ok(())
    }

    /// Exponent scale `1/(n_s·n·V_T)` (1/V).
    pub fn pv_factor(&self) -> f64 {
        1.0 / (self.cells_in_series as f64 * self.ideality * thermal_voltage(self.temperature))
    }
}

/// PV operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvOperatingPoint {
    pub photocurrent: f64,
    pub current: f64,
    pub voltage: f64,
    pub power: f64,
}

impl PvOperatingPoint {
    fn dark() -> Self {
        Self {
            photocurrent: 0.0,
            current: 0.0,
            voltage: 0.0,
            power: 0.0,
        }
    }
}

/// Residual of the diode equation, `g(I) = I_ph - I_d - I_sh - I`, and its
/// derivative in I.
fn residual(params: &PvParams, i_ph: f64, v: f64, i: f64) -> (f64, f64) {
    let c = params.pv_factor();
    let vd = v + i * params.series_resistance;
    let e = (vd * c).exp();
    let g = i_ph - params.saturation_current * (e - 1.0) - vd / params.shunt_resistance - i;
    let dg = -params.saturation_current * e * c * params.series_resistance
        - params.series_resistance / params.shunt_resistance
        - 1.0;
    (g, dg)
}

/// Terminal current at voltage `v`, by Newton's method safeguarded with
/// bisection on a bracket. `g` is strictly decreasing in I.
pub fn current_at_voltage(params: &PvParams, i_ph: f64, v: f64) -> Result<f64> {
    let mut lo = -(i_ph.abs() + 1.0);
    let mut hi = i_ph.abs() + 1.0;
    // Widen until the bracket holds: g(lo) > 0 > g(hi).
    for _ in 0..200 {
        if residual(params, i_ph, v, lo).0 > 0.0 {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..200 {
        if residual(params, i_ph, v, hi).0 < 0.0 {
            break;
        }
        hi *= 2.0;
    }
    let (glo, ghi) = (residual(params, i_ph, v, lo).0, residual(params, i_ph, v, hi).0);
    if !(glo > 0.0 && ghi < 0.0) {
        return Err(Error::Numeric(format!(
            "PV current not bracketed at V = {v:.6} V (g({lo}) = {glo:.3e}, g({hi}) = {ghi:.3e})"
        )));
    }
    let mut i = 0.5 * (lo + hi);
    for _ in 0..500 {
        let (g, dg) = residual(params, i_ph, v, i);
        if g.abs() < CURRENT_TOLERANCE {
            return Ok(i);
        }
        if g > 0.0 {
            lo = i;
        } else {
            hi = i;
        }
        let newton = i - g / dg;
        i = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            // The bracket cannot shrink further; accept the closer end if it
            // meets tolerance.
            let best = [lo, hi, i]
                .into_iter()
                .min_by(|a, b| {
                    let ga = residual(params, i_ph, v, *a).0.abs();
                    let gb = residual(params, i_ph, v, *b).0.abs();
                    ga.total_cmp(&gb)
                })
                .unwrap();
            let r = residual(params, i_ph, v, best).0.abs();
            if r < CURRENT_TOLERANCE {
                return Ok(best);
            }
            return Err(Error::Numeric(format!(
                "PV inner solve stalled at V = {v:.6} V with residual {r:.3e} A"
            )));
        }
    }
    Err(Error::Numeric(format!(
        "PV inner solve did not converge at V = {v:.6} V"
    )))
}

/// Open-circuit voltage for photocurrent `i_ph`.
pub fn open_circuit_voltage(params: &PvParams, i_ph: f64) -> Result<f64> {
    let f = |v: f64| residual(params, i_ph, v, 0.0).0;
    let (mut lo, mut hi) = (0.0, 1.0 / params.pv_factor());
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numeric("open-circuit voltage not bracketed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximum power point for incident optical power `p_in`.
pub fn solve_pv_operating_point(p_in: f64, params: &PvParams) -> Result<PvOperatingPoint> {
    if !(p_in >= 0.0) {
        return Err(Error::validation("pv.incident_power", "must be non-negative"));
    }
    let i_ph = params.responsivity * p_in;
    if i_ph == 0.0 {
        return Ok(PvOperatingPoint::dark());
    }
    let voc = open_circuit_voltage(params, i_ph)?;
    let power = |v: f64| -> Result<f64> { Ok(v * current_at_voltage(params, i_ph, v)?) };

    // Coarse scan, then golden-section refinement around the best sample.
    let step = voc / COARSE_POINTS as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..=COARSE_POINTS {
        let p = power(k as f64 * step)?;
        if p > best.1 {
            best = (k, p);
        }
    }
    let mut a = (best.0 as f64 - 1.0).max(0.0) * step;
    let mut b = ((best.0 + 1) as f64 * step).min(voc);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (power(x1)?, power(x2)?);
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a < 1e-13 * voc {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = power(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = power(x1)?;
        }
    }
    let v = 0.5 * (a + b);
    let i = current_at_voltage(params, i_ph, v)?;
    Ok(PvOperatingPoint {
        photocurrent: i_ph,
        current: i,
        voltage: v,
        power: i * v,
    })
}

/// Operating point with a fixed resistive load `V = I·R`.
pub fn solve_pv_fixed_load(p_in: f64, load: f64, params: &PvParams) -> Result<PvOperatingPoint> {
    if !(load > 0.0) {
        return Err(Error::validation("pv.load_resistance", "must be positive"));
    }
    let i_ph = params.responsivity * p_in.max(0.0);
    if i_ph == 0.0 {
        return Ok(PvOperatingPoint::dark());
    }
    let voc = open_circuit_voltage(params, i_ph)?;
    let (mut lo, mut hi) = (0.0, voc);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if current_at_voltage(params, i_ph, mid)? - mid / load > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let v = 0.5 * (lo + hi);
    let i = current_at_voltage(params, i_ph, v)?;
    Ok(PvOperatingPoint {
        photocurrent: i_ph,
        current: i,
        voltage: v,
        power: i * v,
    })
}
