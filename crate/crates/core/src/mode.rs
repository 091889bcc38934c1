//! Fox-Li eigenmode of the equivalent Fabry-Perot resonator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::aperture::{aperture_t1, aperture_t2};
use crate::error::Result;
use crate::field::{beam_radius, ApertureMask, Grid, ScalarField2D};
use crate::geometry::{equivalent_fp, CavityConfig, Initializer, KernelChoice, RadiusPlane};
use crate::propagation::{fresnel_propagate_with, Kernel, Padding, Propagator};

/// One resonator mirror: a binary aperture and an optional spherical phase.
#[derive(Debug, Clone)]
pub struct Mirror {
    pub aperture: ApertureMask,
    /// Radius of curvature (m), positive for a concave mirror. `None` is flat.
    pub radius_of_curvature: Option<f64>,
}

impl Mirror {
    pub fn flat(aperture: ApertureMask) -> Self {
        Self {
            aperture,
            radius_of_curvature: None,
        }
    }

    fn reflect(&self, field: &mut ScalarField2D) {
        field.apply_mask(&self.aperture);
        if let Some(rc) = self.radius_of_curvature {
            let k = field.wavenumber();
            let xs = field.grid.coordinates();
            for ((iy, ix), v) in field.values.indexed_iter_mut() {
                let rho2 = xs[ix] * xs[ix] + xs[iy] * xs[iy];
                *v *= Complex64::from_polar(1.0, -k * rho2 / rc);
            }
        }
    }
}

/// Iteration controls for [`Resonator::solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoxLiSettings {
    pub iterations: usize,
    pub tolerance: f64,
    pub initializer: Initializer,
    pub radius_plane: RadiusPlane,
}

impl Default for FoxLiSettings {
    fn default() -> Self {
        Self {
            iterations: 300,
            tolerance: 1e-6,
            initializer: Initializer::Uniform,
            radius_plane: RadiusPlane::Incident,
        }
    }
}

/// Two-mirror resonator. The left mirror is the gain-medium side.
#[derive(Debug, Clone)]
pub struct Resonator {
    pub grid: Grid,
    pub wavelength: f64,
    pub length: f64,
    pub left: Mirror,
    pub right: Mirror,
    pub kernel: KernelChoice,
    pub padding: Padding,
    /// Clips the incident field before its radius is measured; for the
    /// cat's-eye cavity this is the clear aperture of the lens in front of
    /// the gain medium.
    pub incident_mask: Option<ApertureMask>,
}

/// Converged (or best available) mode and its scalar figures.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    /// Field leaving the left (gain-medium) mirror.
    pub field_left: ScalarField2D,
    /// Field leaving the right mirror.
    pub field_right: ScalarField2D,
    /// See [`ModeSummary::v1`].
    pub v1: f64,
    pub v2: f64,
    pub beam_radius: f64,
    pub beam_area: f64,
    pub gain_area: f64,
    pub overlap_efficiency: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The cavity aperture is fully vignetted; no mode exists.
    pub closed: bool,
    pub kernel: Option<Kernel>,
}

/// Scalar part of a [`ModeSolution`], cheap to cache and serialise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    /// Power transmitted on the left-to-right pass, `P_right / P_left`.
    pub v1: f64,
    /// Power transmitted on the right-to-left pass, `P_left / P_right`.
    pub v2: f64,
    /// Beam radius w at the gain-medium mirror (m).
    pub beam_radius: f64,
    /// A_s = πw² (m²).
    pub beam_area: f64,
    /// A_g = πr_g² (m²).
    pub gain_area: f64,
    /// η_b = min(A_s/A_g, 1).
    pub overlap_efficiency: f64,
    pub iterations: usize,
    pub converged: bool,
    pub closed: bool,
}

impl ModeSolution {
    pub fn summary(&self) -> ModeSummary {
        ModeSummary {
            v1: self.v1,
            v2: self.v2,
            beam_radius: self.beam_radius,
            beam_area: self.beam_area,
            gain_area: self.gain_area,
            overlap_efficiency: self.overlap_efficiency,
            iterations: self.iterations,
            converged: self.converged,
            closed: self.closed,
        }
    }

    /// Dump `|U|²` at the gain-medium mirror.
    pub fn write_intensity_csv(&self, path: &Path) -> Result<()> {
        self.field_left.write_intensity_csv(path)
    }
}

impl ModeSummary {
    /// Product of the two one-way factors.
    pub fn round_trip_transmission(&self) -> f64 {
        self.v1 * self.v2
    }
}

/// One round trip starting at the right mirror: `T_r`, propagate `L`,
/// `T_l`, propagate `L`, `T_r`.
pub fn round_trip_field(
    field: &ScalarField2D,
    t_left: &ApertureMask,
    t_right: &ApertureMask,
    length: f64,
) -> Result<ScalarField2D> {
    let start = field.clone().masked(t_right);
    let prop = |u: &ScalarField2D| fresnel_propagate_with(u, length, KernelChoice::Auto, Padding::Window);
    let at_left = prop(&start)?.masked(t_left);
    Ok(prop(&at_left)?.masked(t_right))
}

impl Resonator {
    /// Power iteration on the round-trip operator, starting at the right
    /// mirror.
    pub fn solve(&self, settings: &FoxLiSettings, gain_area: f64) -> Result<ModeSolution> {
        if self.left.aperture.is_closed() || self.right.aperture.is_closed() {
            return Ok(self.solve_closed(gain_area));
        }
        let prop = Propagator::new(self.grid, self.wavelength, self.length, self.kernel, self.padding)?;

        let mut right = self.initial_field(settings.initializer);
        self.right.reflect(&mut right);
        right.normalize();

        let mut best: Option<(f64, Pass)> = None;
        let mut converged = false;
        let mut used = 0;
        for it in 1..=settings.iterations {
            used = it;
            let pass = self.round_trip(&prop, &right)?;
            if !(pass.p_right > 0.0) || !pass.p_right.is_finite() {
                // Everything was clipped away; treat as a closed cavity.
                let mut s = self.solve_closed(gain_area);
                s.iterations = it;
                return Ok(s);
            }
            let mut next = pass.right.clone();
            next.scale(1.0 / pass.p_right.sqrt());
            let dist = right.shape_distance(&next);
            let better = best.as_ref().map_or(true, |(d, _)| dist <= *d);
            if better {
                best = Some((dist, pass));
            }
            right = next;
            if dist < settings.tolerance {
                converged = true;
                break;
            }
        }
        let (dist, pass) = best.expect("at least one iteration");
        if !converged {
            log::warn!(
                "Fox-Li did not converge in {} iterations (best shape distance {:.3e})",
                settings.iterations,
                dist
            );
        }

        let w = match (settings.radius_plane, &self.incident_mask) {
            (RadiusPlane::Incident, Some(mask)) => beam_radius(&pass.incident_left.clone().masked(mask))?,
            (RadiusPlane::Incident, None) => beam_radius(&pass.incident_left)?,
            (RadiusPlane::Reflected, _) => beam_radius(&pass.left)?,
        };
        let beam_area = PI * w * w;
        let overlap = if gain_area > 0.0 {
            (beam_area / gain_area).min(1.0)
        } else {
            0.0
        };
        Ok(ModeSolution {
            v1: pass.p_right / pass.p_left,
            v2: pass.p_left / pass.p_start,
            field_left: pass.left,
            field_right: pass.right,
            beam_radius: w,
            beam_area,
            gain_area,
            overlap_efficiency: overlap,
            iterations: used,
            converged,
            closed: false,
            kernel: Some(prop.kernel()),
        })
    }

    fn solve_closed(&self, gain_area: f64) -> ModeSolution {
        ModeSolution {
            field_left: ScalarField2D::zeros(self.grid, self.wavelength),
            field_right: ScalarField2D::zeros(self.grid, self.wavelength),
            v1: 0.0,
            v2: 0.0,
            beam_radius: 0.0,
            beam_area: 0.0,
            gain_area,
            overlap_efficiency: 0.0,
            iterations: 0,
            converged: false,
            closed: true,
            kernel: None,
        }
    }

    fn initial_field(&self, init: Initializer) -> ScalarField2D {
        match init {
            Initializer::Uniform => {
                ScalarField2D::uniform(self.grid, self.wavelength, Complex64::new(1.0, 0.0))
            }
            Initializer::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut field = ScalarField2D::zeros(self.grid, self.wavelength);
                field.values.iter_mut().for_each(|v| {
                    let amp: f64 = rng.gen_range(0.0..1.0);
                    let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                    *v = Complex64::from_polar(amp, phase);
                });
                field
            }
        }
    }

    fn round_trip(&self, prop: &Propagator, right: &ScalarField2D) -> Result<Pass> {
        let p_start = right.power();
        let incident_left = prop.propagate(right)?;
        let mut left = incident_left.clone();
        self.left.reflect(&mut left);
        let p_left = left.power();
        let mut next = prop.propagate(&left)?;
        self.right.reflect(&mut next);
        let p_right = next.power();
        Ok(Pass {
            incident_left,
            left,
            right: next,
            p_start,
            p_left,
            p_right,
        })
    }
}

#[derive(Debug, Clone)]
struct Pass {
    incident_left: ScalarField2D,
    left: ScalarField2D,
    right: ScalarField2D,
    p_start: f64,
    p_left: f64,
    p_right: f64,
}

/// Computation grid for a cavity: `S_N` samples across a window `2·G·r`.
pub fn cavity_grid(config: &CavityConfig) -> Result<Grid> {
    let window = 2.0 * config.algorithm.window_factor * config.geometry.cat_radius;
    Grid::with_window(config.algorithm.samples, window)
}

/// Equivalent resonator of a cat's-eye cavity. The gain-medium side carries
/// `T_l = T1·T2`, the other side `T_r = T1`.
pub fn equivalent_resonator(config: &CavityConfig) -> Result<Resonator> {
    let (length, theta) = equivalent_fp(config)?;
    let grid = cavity_grid(config)?;
    let g = &config.geometry;
    if theta.abs() > crate::geometry::PARAXIAL_LIMIT {
        log::warn!(
            "deflection {:.1}° is outside the paraxial regime",
            theta.to_degrees()
        );
    }
    let t1 = aperture_t1(grid, g.cat_radius, theta, g.focal_length);
    let t2 = aperture_t2(grid, g.gain_radius, theta);
    Ok(Resonator {
        grid,
        wavelength: g.wavelength,
        length,
        left: Mirror::flat(t1.intersect(&t2)),
        right: Mirror::flat(t1),
        kernel: config.algorithm.kernel,
        padding: Padding::Window,
        incident_mask: Some(ApertureMask::disc(grid, g.cat_radius, 0.0, 0.0)),
    })
}

/// Self-reproducing mode of the cavity described by `config`.
pub fn fox_li_solve(config: &CavityConfig) -> Result<ModeSolution> {
    let resonator = equivalent_resonator(config)?;
    let a = &config.algorithm;
    let settings = FoxLiSettings {
        iterations: a.iterations,
        tolerance: a.tolerance,
        initializer: a.initializer,
        radius_plane: a.radius_plane,
    };
    let gain_area = PI * config.geometry.gain_radius.powi(2);
    resonator.solve(&settings, gain_area)
}
