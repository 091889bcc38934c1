//! Resonant-beam simultaneous lightwave information and power transfer
//! (SLIPT) link model: cat's-eye cavity geometry, Fox-Li mode solving,
//! laser output power, and PV/APD receiver performance.

pub mod aperture;
pub mod cache;
pub mod config;
pub mod constants;
pub mod emit;
pub mod energy_map;
pub mod error;
mod fft;
pub mod field;
pub mod geometry;
pub mod link;
pub mod mode;
pub mod power;
pub mod propagation;
pub mod pv;
pub mod receiver;
pub mod sweep;

pub use cache::ModeCache;
pub use config::SystemConfig;
pub use error::{Error, Result};
pub use geometry::CavityConfig;
pub use link::{link_metrics, LinkMetrics};
pub use mode::{fox_li_solve, ModeSolution, ModeSummary};
pub use sweep::{run_sweep, SweepSpec};
