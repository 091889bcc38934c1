//! Parameter sweeps over distance, angle, drive and split ratio.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::cache::ModeCache;
use crate::config::{DriveKind, SystemConfig};
use crate::error::{Error, Result};
use crate::link::{link_metrics_for_mode, LinkMetrics};
use crate::power::DriveMode;

/// Swept parameter. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    Distance(Vec<f64>),
    Theta(Vec<f64>),
    InputPower(Vec<f64>),
    InputCurrent(Vec<f64>),
    SplitRatio(Vec<f64>),
    /// Explicit `(L, θ)` pairs.
    Cases(Vec<(f64, f64)>),
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Distance(_) => "L_m",
            Axis::Theta(_) => "theta_deg",
            Axis::InputPower(_) => "P_in_W",
            Axis::InputCurrent(_) => "I_in_A",
            Axis::SplitRatio(_) => "mu",
            Axis::Cases(_) => "cases",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::Distance(v)
            | Axis::Theta(v)
            | Axis::InputPower(v)
            | Axis::InputCurrent(v)
            | Axis::SplitRatio(v) => v.len(),
            Axis::Cases(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, index: usize, point: &mut Point) {
        match self {
            Axis::Distance(v) => point.distance = v[index],
            Axis::Theta(v) => point.theta_deg = v[index],
            Axis::InputPower(v) => point.drive = DriveMode::Power(v[index]),
            Axis::InputCurrent(v) => point.drive = DriveMode::Current(v[index]),
            Axis::SplitRatio(v) => point.mu = v[index],
            Axis::Cases(v) => {
                point.distance = v[index].0;
                point.theta_deg = v[index].1;
            }
        }
    }
}

/// A sweep of at most two axes; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: Option<String>,
    pub axes: Vec<Axis>,
}

/// One grid point (θ in degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub distance: f64,
    pub theta_deg: f64,
    pub drive: DriveMode,
    pub mu: f64,
}

/// A grid point and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub point: Point,
    pub outcome: std::result::Result<LinkMetrics, String>,
}

/// Names of the built-in sweeps.
pub const PRESETS: [&str; 5] = ["fig6", "fig7", "fig8", "fig9", "fig10"];

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

impl SweepSpec {
    pub fn single() -> Self {
        Self {
            name: None,
            axes: Vec::new(),
        }
    }

    /// Built-in sweep by name.
    pub fn preset(name: &str) -> Option<Self> {
        let theta = || Axis::Theta(range(0.0, 15.0, 1.0));
        let axes = match name {
            "fig6" => vec![Axis::Distance(vec![1.0, 2.0, 3.0, 5.0, 10.0]), theta()],
            "fig7" => vec![
                Axis::SplitRatio(vec![0.0, 0.25, 0.5, 0.75, 0.99, 1.0]),
                theta(),
            ],
            "fig8" => vec![
                Axis::Cases(vec![(2.0, 0.0), (2.0, 10.0), (3.0, 0.0), (3.0, 10.0)]),
                Axis::InputPower(range(100.0, 300.0, 10.0)),
            ],
            "fig9" => vec![
                Axis::Theta(vec![0.0, 10.0, 15.0]),
                Axis::Distance(range(1.0, 10.0, 0.5)),
            ],
            "fig10" => vec![Axis::InputPower(vec![150.0, 200.0, 250.0]), theta()],
            _ => return None,
        };
        Some(Self {
            name: Some(name.to_string()),
            axes,
        })
    }

    /// Fixed parameters a preset pins regardless of the config file.
    pub fn preset_overrides(&self, config: &mut SystemConfig) {
        match self.name.as_deref() {
            Some("fig6" | "fig9") => {
                config.link.input_power = 200.0;
                config.link.drive = DriveKind::Power;
            }
            Some("fig7" | "fig10") => {
                config.link.distance = 3.0;
                config.link.input_power = 200.0;
                config.link.drive = DriveKind::Power;
            }
            _ => {}
        }
    }

    pub fn description(&self) -> String {
        if self.axes.is_empty() {
            return "single point".into();
        }
        self.axes
            .iter()
            .map(|a| format!("{} ({} values)", a.name(), a.len()))
            .collect::<Vec<_>>()
            .join(" x ")
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(Error::validation("sweep", "at most two axes may be swept"));
        }
        for a in &self.axes {
            if a.is_empty() {
                return Err(Error::validation("sweep", format!("axis {} is empty", a.name())));
            }
        }
        if self.axes.len() == 2 && self.axes[0].name() == self.axes[1].name() {
            return Err(Error::validation("sweep", "an axis appears twice"));
        }
        let drives = self
            .axes
            .iter()
            .filter(|a| matches!(a, Axis::InputPower(_) | Axis::InputCurrent(_)))
            .count();
        let geometry = self
            .axes
            .iter()
            .filter(|a| matches!(a, Axis::Distance(_) | Axis::Theta(_) | Axis::Cases(_)))
            .count();
        if drives > 1 || (geometry > 1 && self.axes.iter().any(|a| matches!(a, Axis::Cases(_)))) {
            return Err(Error::validation("sweep", "conflicting axes"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row-major order.
    pub fn points(&self, config: &SystemConfig) -> Vec<Point> {
        let base = Point {
            distance: config.link.distance,
            theta_deg: config.link.theta_deg,
            drive: config.link.drive_mode(),
            mu: config.link.split_ratio,
        };
        let mut out = vec![base];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..axis.len()).map(move |i| {
                        let mut q = p;
                        axis.apply(i, &mut q);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

fn parse_values(name: &str, text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::validation(format!("sweep.{name}"), msg);
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("cannot parse number {s:?}")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range must be start:stop:step".into()));
        }
        let (a, b, s) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(s > 0.0) || b < a {
            return Err(bad("range needs step > 0 and stop >= start".into()));
        }
        Ok(range(a, b, s))
    } else {
        text.split(',').map(num).collect()
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    /// A preset name, or `;`-separated axes such as
    /// `L_m=1:10:0.5;theta_deg=0,10,15` or `cases=2/0,3/10;P_in_W=100:300:10`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = SweepSpec::preset(s) {
            return Ok(p);
        }
        if s.is_empty() || s == "single" {
            return Ok(SweepSpec::single());
        }
        let mut axes = Vec::new();
        for part in s.split(';').filter(|p| !p.trim().is_empty()) {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| Error::validation("sweep", format!("expected name=values, got {part:?}")))?;
            let name = name.trim();
            let axis = match name {
                "L_m" | "L" | "distance" => Axis::Distance(parse_values(name, values)?),
                "theta_deg" | "theta" => Axis::Theta(parse_values(name, values)?),
                "P_in_W" | "P_in" | "input_power" => Axis::InputPower(parse_values(name, values)?),
                "I_in_A" | "I_in" | "input_current" => Axis::InputCurrent(parse_values(name, values)?),
                "mu" | "split_ratio" => Axis::SplitRatio(parse_values(name, values)?),
                "cases" => {
                    let mut cases = Vec::new();
                    for c in values.split(',') {
                        let (l, t) = c.split_once('/').ok_or_else(|| {
                            Error::validation("sweep.cases", format!("expected L/theta, got {c:?}"))
                        })?;
                        let l = parse_values("cases", l)?;
                        let t = parse_values("cases", t)?;
                        cases.push((l[0], t[0]));
                    }
                    Axis::Cases(cases)
                }
                other => {
                    return Err(Error::validation(
                        "sweep",
                        format!("unknown axis {other:?} (expected L_m, theta_deg, P_in_W, I_in_A, mu or cases)"),
                    ))
                }
            };
            axes.push(axis);
        }
        let spec = SweepSpec { name: None, axes };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n}: {}", self.description()),
            None => f.write_str(&self.description()),
        }
    }
}

/// Evaluate one point, solving (or fetching) its mode.
pub fn evaluate_point(config: &SystemConfig, point: &Point, cache: &ModeCache) -> Result<LinkMetrics> {
    let mut link = config.link.clone();
    link.distance = point.distance;
    link.theta_deg = point.theta_deg;
    link.split_ratio = point.mu;
    link.validate()?;
    let theta = point.theta_deg.to_radians();
    let cavity = config.cavity(point.distance, theta);
    let mode = cache.get_or_solve(&cavity)?;
    link_metrics_for_mode(config, point.distance, theta, &mode, point.drive, point.mu)
}

/// Evaluate every point on `jobs` worker threads. Rows come back in grid
/// order whatever the thread count; failed points carry their error.
pub fn run_sweep(
    config: &SystemConfig,
    spec: &SweepSpec,
    cache: &ModeCache,
    jobs: usize,
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    spec.validate()?;
    let points = spec.points(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|p| ResultRow {
                point: *p,
                outcome: evaluate_point(config, p, cache).map_err(|e| e.to_string()),
            })
            .collect::<Vec<_>>()
    });
    for row in &rows {
        if let Err(e) = &row.outcome {
            log::warn!(
                "point L = {} m, theta = {} deg failed: {e}",
                row.point.distance,
                row.point.theta_deg
            );
        }
    }
    Ok(rows)
}
