//! Physical constants, with the rounded values used by the link model.

/// Planck constant (J s).
pub const PLANCK: f64 = 6.62607015e-34;
/// Speed of light (m/s), rounded.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
/// Elementary charge (C), rounded.
pub const ELECTRON_CHARGE: f64 = 1.6e-19;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Photon energy per unit charge, `hc/(q λ)`, in volts.
pub fn photon_voltage(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / (ELECTRON_CHARGE * wavelength)
}

/// Thermal voltage `kT/q` (V).
pub fn thermal_voltage(temperature: f64) -> f64 {
    BOLTZMANN * temperature / ELECTRON_CHARGE
}
