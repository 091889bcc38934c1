//! Output-power maps over a receiving plane below the transmitter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::ModeCache;
use crate::config::SystemConfig;
use crate::emit::format_sig9;
use crate::error::{Error, Result};
use crate::link::link_metrics_for_mode;

/// How P_out is obtained at each receiver position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapMode {
    /// Solve the mode at every distinct radial offset.
    Exact,
    /// Solve on `nodes` evenly spaced radial offsets and interpolate P_out
    /// linearly in between.
    Interpolated { nodes: usize },
}

/// Square grid of receiver positions centred under the transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapGrid {
    /// Height of the transmitter above the receiving plane (m).
    pub height: f64,
    /// Half-width of the square (m).
    pub half_width: f64,
    /// Points per side.
    pub points: usize,
}

impl MapGrid {
    pub fn coordinates(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        let step = 2.0 * self.half_width / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                // Mirror-symmetric by construction so that ±x give the same ρ.
                let k = i as f64 - (self.points - 1) as f64 / 2.0;
                k * step
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.height > 0.0) {
            return Err(Error::validation("map.height", "must be positive"));
        }
        if !(self.half_width >= 0.0) {
            return Err(Error::validation("map.half_width", "must be non-negative"));
        }
        if self.points == 0 {
            return Err(Error::validation("map.points", "must be at least 1"));
        }
        Ok(())
    }
}

/// Link geometry for a receiver at horizontal offset `rho` from nadir.
pub fn position_to_link(height: f64, rho: f64) -> (f64, f64) {
    ((height * height + rho * rho).sqrt(), (rho / height).atan())
}

/// P_out on the receiving plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyMap {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `p_out[iy][ix]` (W).
    pub p_out: Vec<Vec<f64>>,
}

impl EnergyMap {
    /// Dense CSV: a header of x values, then one row per y.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y_m\\x_m");
        for x in &self.x {
            out.push(',');
            out.push_str(&format_sig9(*x));
        }
        out.push('\n');
        for (y, row) in self.y.iter().zip(&self.p_out) {
            out.push_str(&format_sig9(*y));
            for v in row {
                out.push(',');
                out.push_str(&format_sig9(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn p_out_at(config: &SystemConfig, height: f64, rho: f64, cache: &ModeCache) -> Result<f64> {
    let (distance, theta) = position_to_link(height, rho);
    let mode = cache.get_or_solve(&config.cavity(distance, theta))?;
    let m = link_metrics_for_mode(
        config,
        distance,
        theta,
        &mode,
        config.link.drive_mode(),
        config.link.split_ratio,
    )?;
    Ok(m.p_out())
}

/// Evaluate P_out over `grid` with the drive in `config.link`.
pub fn energy_distribution_map(
    config: &SystemConfig,
    grid: &MapGrid,
    mode: MapMode,
    cache: &ModeCache,
    jobs: usize,
) -> Result<EnergyMap> {
    config.validate()?;
    grid.validate()?;
    let xs = grid.coordinates();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;

    let radius = |ix: usize, iy: usize| xs[ix].hypot(xs[iy]);
    let values: Vec<f64> = match mode {
        MapMode::Exact => {
            let cells: Vec<(usize, usize)> = (0..xs.len())
                .flat_map(|iy| (0..xs.len()).map(move |ix| (ix, iy)))
                .collect();
            pool.install(|| {
                cells
                    .par_iter()
                    .map(|&(ix, iy)| p_out_at(config, grid.height, radius(ix, iy), cache))
                    .collect::<Result<Vec<_>>>()
            })?
        }
        MapMode::Interpolated { nodes } => {
            if nodes < 2 {
                return Err(Error::validation("map.nodes", "need at least 2 nodes"));
            }
            let rho_max = grid.half_width * std::f64::consts::SQRT_2;
            let node_rho: Vec<f64> = (0..nodes)
                .map(|i| rho_max * i as f64 / (nodes - 1) as f64)
                .collect();
            let node_p = pool.install(|| {
                node_rho
                    .par_iter()
                    .map(|&r| p_out_at(config, grid.height, r, cache))
                    .collect::<Result<Vec<_>>>()
            })?;
            (0..xs.len())
                .flat_map(|iy| (0..xs.len()).map(move |ix| (ix, iy)))
                .map(|(ix, iy)| interpolate(&node_rho, &node_p, radius(ix, iy)))
                .collect()
        }
    };
    let n = xs.len();
    Ok(EnergyMap {
        x: xs.clone(),
        y: xs,
        p_out: values.chunks(n).map(|c| c.to_vec()).collect(),
    })
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|v| *v <= x) - 1;
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}
