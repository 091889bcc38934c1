//! TOML system configuration.
//!
//! Every section is optional and every key defaults to the reference
//! system. Angles are in degrees here; the library works in radians.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{AlgorithmSettings, CatEyeGeometry, CavityConfig};
use crate::power::{DriveMode, GainMediumParams};
use crate::pv::PvParams;
use crate::receiver::ApdParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    /// Drive by electrical input power.
    #[default]
    Power,
    /// Drive by pump diode current.
    Current,
}

/// Operating point of the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSettings {
    /// Transmission distance L (m).
    pub distance: f64,
    /// Incidence angle θ (degrees).
    pub theta_deg: f64,
    /// Electrical input power P_in (W).
    pub input_power: f64,
    /// Pump diode current (A), used when `drive = "current"`.
    pub input_current: f64,
    /// PV/APD split ratio μ.
    pub split_ratio: f64,
    pub drive: DriveKind,
}

impl Default for LinkSettings {
    fn default() -> Self {
        Self {
            distance: 3.0,
            theta_deg: 0.0,
            input_power: 200.0,
            input_current: 10.5,
            split_ratio: 0.99,
            drive: DriveKind::Power,
        }
    }
}

impl LinkSettings {
    pub fn drive_mode(&self) -> DriveMode {
        match self.drive {
            DriveKind::Power => DriveMode::Power(self.input_power),
            DriveKind::Current => DriveMode::Current(self.input_current),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0 && self.distance.is_finite()) {
            return Err(Error::validation("link.distance", "must be positive"));
        }
        if !(self.theta_deg.abs() < 90.0) {
            return Err(Error::validation("link.theta_deg", "must lie in (-90, 90)"));
        }
        if !(self.input_power >= 0.0 && self.input_power.is_finite()) {
            return Err(Error::validation("link.input_power", "must be non-negative"));
        }
        if !(self.input_current >= 0.0 && self.input_current.is_finite()) {
            return Err(Error::validation("link.input_current", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.split_ratio) {
            return Err(Error::validation("link.split_ratio", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Whole-system configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub resonator: CatEyeGeometry,
    pub algorithm: AlgorithmSettings,
    pub gain_medium: GainMediumParams,
    pub pv: PvParams,
    pub apd: ApdParams,
    pub link: LinkSettings,
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SystemConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
                other => other,
            })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.resonator.validate()?;
        self.algorithm.validate()?;
        self.gain_medium.validate()?;
        self.pv.validate()?;
        self.apd.validate()?;
        self.link.validate()?;
        if self.resonator.reflectivity >= 1.0 {
            return Err(Error::validation(
                "resonator.reflectivity",
                "must be below 1 for any output coupling",
            ));
        }
        Ok(())
    }

    /// Cavity for a link of length `distance` (m) at angle `theta` (rad).
    pub fn cavity(&self, distance: f64, theta: f64) -> CavityConfig {
        CavityConfig::for_link(self.resonator.clone(), self.algorithm.clone(), distance, theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = SystemConfig::from_toml_str("").unwrap();
        assert_eq!(c, SystemConfig::default());
        assert_eq!(c.link.distance, 3.0);
        assert_eq!(c.algorithm.iterations, 300);
        assert_eq!(c.resonator.gain_radius, 3e-3);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = SystemConfig::default();
        c.link.theta_deg = 7.5;
        c.algorithm.initializer = crate::geometry::Initializer::Random { seed: 3 };
        let back = SystemConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_sections() {
        let c = SystemConfig::from_toml_str(
            "[resonator]\ngain_radius = 2e-3\n[algorithm]\nsamples = 512\nkernel = \"transfer_function\"\n[link]\ndrive = \"current\"\n",
        )
        .unwrap();
        assert_eq!(c.resonator.gain_radius, 2e-3);
        assert_eq!(c.resonator.cat_radius, 12e-3);
        assert_eq!(c.algorithm.samples, 512);
        assert_eq!(c.link.drive_mode(), DriveMode::Current(10.5));
    }

    #[test]
    fn field_level_errors() {
        let err = SystemConfig::from_toml_str("[algorithm]\nsamples = 500\n").unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "algorithm.samples"),
            other => panic!("{other:?}"),
        }
        let err = SystemConfig::from_toml_str("[link]\nsplit_ratio = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "link.split_ratio"));
        let err = SystemConfig::from_toml_str("[link]\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("bogus")));
    }
}
