//! Paraxial ray algebra for the two-cat's-eye mobile resonant cavity.
//!
//! Matrices are written in the unfolded convention: a ray leaves the front
//! face of lens L1, drifts across the gap, is retro-reflected by the remote
//! cat's eye, drifts back and is retro-reflected by the local one. Each
//! element's matrix acts on `[r, r']` in propagation order, so composing
//! `a.then(b)` means "apply `a`, then `b`".

use serde::{Deserialize, Serialize};
use std::ops::Mul;

use crate::error::{Error, Result};

/// Below this `|2 - A - D|` the round trip has no unique fixed ray.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Slopes above this are flagged as leaving the paraxial regime.
pub const PARAXIAL_LIMIT: f64 = 0.5;

/// Position and slope of a ray relative to the origin optic axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayState {
    /// Transverse offset (m).
    pub r: f64,
    /// Slope (rad).
    pub r_slope: f64,
}

impl RayState {
    pub fn new(r: f64, r_slope: f64) -> Self {
        if r_slope.abs() >= PARAXIAL_LIMIT {
            log::warn!("ray slope {r_slope:.3} rad is outside the paraxial regime");
        }
        Self { r, r_slope }
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.r_slope.is_finite()
    }
}

/// 2x2 ABCD ray transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn apply(&self, ray: RayState) -> RayState {
        RayState {
            r: self.a * ray.r + self.b * ray.r_slope,
            r_slope: self.c * ray.r + self.d * ray.r_slope,
        }
    }

    /// `self` followed by `next`, i.e. the product `next * self`.
    pub fn then(&self, next: &TransferMatrix) -> TransferMatrix {
        *next * *self
    }

    pub fn approx_eq(&self, other: &TransferMatrix, tol: f64) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.b - other.b).abs() <= tol
            && (self.c - other.c).abs() <= tol
            && (self.d - other.d).abs() <= tol
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// Offset and tilt of an element axis relative to the origin optic axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MisalignmentVector {
    /// Transverse offset (m).
    pub delta: f64,
    /// Tilt (rad).
    pub delta_slope: f64,
}

impl MisalignmentVector {
    pub fn offset(delta: f64) -> Self {
        Self {
            delta,
            delta_slope: 0.0,
        }
    }
}

/// ABCDEF transfer: `r2 = M r1 + [E, F]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentedTransfer {
    pub m: TransferMatrix,
    /// Offset term (m).
    pub e: f64,
    /// Slope term (rad).
    pub f_term: f64,
}

impl AugmentedTransfer {
    pub const IDENTITY: Self = Self {
        m: TransferMatrix::IDENTITY,
        e: 0.0,
        f_term: 0.0,
    };

    pub fn aligned(m: TransferMatrix) -> Self {
        Self {
            m,
            e: 0.0,
            f_term: 0.0,
        }
    }

    pub fn apply(&self, ray: RayState) -> RayState {
        let out = self.m.apply(ray);
        RayState {
            r: out.r + self.e,
            r_slope: out.r_slope + self.f_term,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AugmentedTransfer) -> AugmentedTransfer {
        let m = next.m * self.m;
        AugmentedTransfer {
            m,
            e: next.m.a * self.e + next.m.b * self.f_term + next.e,
            f_term: next.m.c * self.e + next.m.d * self.f_term + next.f_term,
        }
    }
}

/// Which expression for the off-axis cat's-eye term `E_M` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MisalignmentFormula {
    /// Closed form `[-2Δl/f, 2Δ(1-f)/f²]` taken as written; mixes units.
    Literal,
    /// `(drift(2l) - M_cat)·[Δ, Δ']`, dimensionally consistent.
    #[default]
    Rederived,
}

/// Receiver offset, given either as a deflection angle or a transverse shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deflection {
    /// Angle between the new optic axis and the lens normals (rad).
    Angle(f64),
    /// Transverse offset Δ of the remote cat's eye (m).
    Offset(f64),
}

impl Default for Deflection {
    fn default() -> Self {
        Deflection::Angle(0.0)
    }
}

/// Cat's-eye and gain-medium geometry shared by every link position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatEyeGeometry {
    /// Lens focal length f (m).
    pub focal_length: f64,
    /// Lens-mirror gap l (m).
    pub lens_mirror_gap: f64,
    /// Cat's-eye aperture radius r (m).
    pub cat_radius: f64,
    /// Gain-medium radius r_g (m).
    pub gain_radius: f64,
    /// Resonant-beam wavelength λ (m).
    pub wavelength: f64,
    /// Output-coupler reflectivity R.
    pub reflectivity: f64,
    pub misalignment_formula: MisalignmentFormula,
}

impl Default for CatEyeGeometry {
    fn default() -> Self {
        Self {
            focal_length: 0.025,
            lens_mirror_gap: 0.025,
            cat_radius: 12e-3,
            gain_radius: 3e-3,
            wavelength: 1.064e-6,
            reflectivity: 0.7,
            misalignment_formula: MisalignmentFormula::Rederived,
        }
    }
}

impl CatEyeGeometry {
    pub fn validate(&self) -> Result<()> {
        positive("resonator.focal_length", self.focal_length)?;
        positive("resonator.lens_mirror_gap", self.lens_mirror_gap)?;
        positive("resonator.cat_radius", self.cat_radius)?;
        positive("resonator.gain_radius", self.gain_radius)?;
        positive("resonator.wavelength", self.wavelength)?;
        if !(self.reflectivity > 0.0 && self.reflectivity <= 1.0) {
            return Err(Error::validation(
                "resonator.reflectivity",
                format!("must lie in (0, 1], got {}", self.reflectivity),
            ));
        }
        Ok(())
    }
}

/// Which free-space kernel the propagator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    /// Pick whichever kernel is adequately sampled for the grid and distance.
    #[default]
    Auto,
    /// Sampled Fresnel impulse response, transformed by FFT.
    ImpulseResponse,
    /// Analytic Fresnel transfer function.
    TransferFunction,
}

/// Starting field for the Fox-Li iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initializer {
    #[default]
    Uniform,
    Random { seed: u64 },
}

/// Plane and side of the mirror at which the beam radius is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusPlane {
    /// Field arriving at the gain-medium mirror, before its aperture.
    #[default]
    Incident,
    /// Field leaving the gain-medium mirror, after its aperture.
    Reflected,
}

/// Fox-Li and FFT knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmSettings {
    /// Maximum Fox-Li round trips t.
    pub iterations: usize,
    /// Grid samples per side S_N.
    pub samples: usize,
    /// Computation window expand factor G; the window is 2·G·r wide.
    pub window_factor: f64,
    /// L2 shape-distance convergence threshold.
    pub tolerance: f64,
    pub kernel: KernelChoice,
    pub initializer: Initializer,
    pub radius_plane: RadiusPlane,
}

impl Default for AlgorithmSettings {
    fn default() -> Self {
        Self {
            iterations: 300,
            samples: 2048,
            window_factor: 2.0,
            tolerance: 1e-6,
            kernel: KernelChoice::Auto,
            initializer: Initializer::Uniform,
            radius_plane: RadiusPlane::Incident,
        }
    }
}

impl AlgorithmSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 || !self.samples.is_power_of_two() {
            return Err(Error::validation(
                "algorithm.samples",
                format!("must be a power of two, got {}", self.samples),
            ));
        }
        if !(self.window_factor >= 1.0) {
            return Err(Error::validation(
                "algorithm.window_factor",
                format!("must be >= 1, got {}", self.window_factor),
            ));
        }
        if self.iterations == 0 {
            return Err(Error::validation("algorithm.iterations", "must be >= 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("algorithm.tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Full description of one cavity configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    pub geometry: CatEyeGeometry,
    /// Lens-face separation d (m).
    pub separation: f64,
    pub deflection: Deflection,
    pub algorithm: AlgorithmSettings,
}

impl CavityConfig {
    pub fn new(geometry: CatEyeGeometry, separation: f64, deflection: Deflection) -> Self {
        Self {
            geometry,
            separation,
            deflection,
            algorithm: AlgorithmSettings::default(),
        }
    }

    /// Configuration whose equivalent resonator has length `length` and
    /// incidence angle `theta`.
    pub fn for_link(
        geometry: CatEyeGeometry,
        algorithm: AlgorithmSettings,
        length: f64,
        theta: f64,
    ) -> Self {
        let separation = length * theta.cos() + 2.0 * geometry.focal_length;
        Self {
            geometry,
            separation,
            deflection: Deflection::Angle(theta),
            algorithm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.algorithm.validate()?;
        if !(self.separation > 2.0 * self.geometry.focal_length) {
            return Err(Error::InvalidGeometry(format!(
                "lens separation d = {} must exceed 2f = {}",
                self.separation,
                2.0 * self.geometry.focal_length
            )));
        }
        match self.deflection {
            Deflection::Angle(t) if !(t.is_finite() && t.abs() < std::f64::consts::FRAC_PI_2) => {
                Err(Error::InvalidGeometry(format!("deflection angle {t} rad out of range")))
            }
            Deflection::Offset(x) if !x.is_finite() => {
                Err(Error::InvalidGeometry("deflection offset is not finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Axial distance between the two front focal points, `d - 2f`.
    fn focal_separation(&self) -> f64 {
        self.separation - 2.0 * self.geometry.focal_length
    }

    /// Deflection angle θ, converting from Δ if needed.
    pub fn theta(&self) -> f64 {
        match self.deflection {
            Deflection::Angle(t) => t,
            Deflection::Offset(delta) => (delta / self.focal_separation()).atan(),
        }
    }

    /// Transverse offset Δ, converting from θ if needed.
    pub fn delta(&self) -> f64 {
        match self.deflection {
            Deflection::Angle(t) => self.focal_separation() * t.tan(),
            Deflection::Offset(delta) => delta,
        }
    }

    pub fn misalignment(&self) -> MisalignmentVector {
        MisalignmentVector::offset(self.delta())
    }

    /// Optic axis of the misaligned cavity at the front face of L1.
    ///
    /// Solves the round-trip fixed point when it is unique. The ideal
    /// cat's eye (`l = f`) is marginally stable, so there the limit
    /// `l -> f` is used: the line through both front focal points.
    pub fn optic_axis(&self) -> Result<RayState> {
        self.validate()?;
        let rt = round_trip(self, self.misalignment())?;
        match solve_optic_axis(&rt) {
            Err(Error::DegenerateCavity { .. })
                if self.geometry.misalignment_formula == MisalignmentFormula::Rederived =>
            {
                let span = self.focal_separation();
                let delta = self.delta();
                Ok(RayState::new(
                    -delta * self.geometry.focal_length / span,
                    delta / span,
                ))
            }
            other => other,
        }
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive, got {value}")))
    }
}

/// Drift over `distance`.
pub fn free_space(distance: f64) -> Result<TransferMatrix> {
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "free-space distance must be non-negative, got {distance}"
        )));
    }
    Ok(TransferMatrix::new(1.0, distance, 0.0, 1.0))
}

/// Thin lens of focal length `focal_length`.
pub fn thin_lens(focal_length: f64) -> Result<TransferMatrix> {
    if !(focal_length > 0.0) || !focal_length.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "focal length must be positive, got {focal_length}"
        )));
    }
    Ok(TransferMatrix::new(1.0, 0.0, -1.0 / focal_length, 1.0))
}

/// Lens, gap to the mirror, gap back, lens.
pub fn cat_eye_matrix(focal_length: f64, gap: f64) -> Result<TransferMatrix> {
    if !(gap > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "lens-mirror gap must be positive, got {gap}"
        )));
    }
    let lens = thin_lens(focal_length)?;
    let drift = free_space(gap)?;
    Ok(lens * drift * drift * lens)
}

/// Cat's eye whose axis is displaced by `delta`.
pub fn cat_eye_misalignment(
    focal_length: f64,
    gap: f64,
    delta: MisalignmentVector,
    formula: MisalignmentFormula,
) -> Result<AugmentedTransfer> {
    let m = cat_eye_matrix(focal_length, gap)?;
    let (e, f_term) = match formula {
        MisalignmentFormula::Literal => (
            -2.0 * delta.delta * gap / focal_length,
            2.0 * delta.delta * (1.0 - focal_length) / (focal_length * focal_length),
        ),
        MisalignmentFormula::Rederived => {
            let path = free_space(2.0 * gap)?;
            let diff = TransferMatrix::new(path.a - m.a, path.b - m.b, path.c - m.c, path.d - m.d);
            (
                diff.a * delta.delta + diff.b * delta.delta_slope,
                diff.c * delta.delta + diff.d * delta.delta_slope,
            )
        }
    };
    Ok(AugmentedTransfer { m, e, f_term })
}

/// Round trip from the front face of L1: gap, remote (misaligned) cat's eye,
/// gap, local cat's eye.
pub fn round_trip(config: &CavityConfig, delta: MisalignmentVector) -> Result<AugmentedTransfer> {
    let g = &config.geometry;
    let gap = AugmentedTransfer::aligned(free_space(config.separation)?);
    let remote = cat_eye_misalignment(
        g.focal_length,
        g.lens_mirror_gap,
        delta,
        g.misalignment_formula,
    )?;
    let local = AugmentedTransfer::aligned(cat_eye_matrix(g.focal_length, g.lens_mirror_gap)?);
    Ok(gap.then(&remote).then(&gap).then(&local))
}

/// Fixed ray of the round-trip map, `M r + E = r`.
pub fn solve_optic_axis(rt: &AugmentedTransfer) -> Result<RayState> {
    let TransferMatrix { a, b, c, d } = rt.m;
    let denom = 2.0 - a - d;
    if denom.abs() < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateCavity {
            margin: denom.abs(),
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    let (e, f) = (rt.e, rt.f_term);
    Ok(RayState::new(
        ((1.0 - d) * e + b * f) / denom,
        (c * e + (1.0 - a) * f) / denom,
    ))
}

/// Equivalent Fabry-Perot length along the new optic axis and the incidence
/// angle on the cat's-eye faces.
///
/// The equivalent mirrors sit at the two front focal points, `d - 2f` apart
/// axially and `Δ` apart transversely.
pub fn equivalent_fp(config: &CavityConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let span = config.focal_separation();
    if config.separation < 20.0 * config.geometry.focal_length {
        log::warn!(
            "lens separation {} m is not much larger than f = {} m; the equivalent resonator is approximate",
            config.separation,
            config.geometry.focal_length
        );
    }
    let theta = config.theta();
    Ok((span / theta.cos(), theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(f: f64, l: f64, d: f64, delta: f64) -> CavityConfig {
        let geometry = CatEyeGeometry {
            focal_length: f,
            lens_mirror_gap: l,
            ..CatEyeGeometry::default()
        };
        CavityConfig::new(geometry, d, Deflection::Offset(delta))
    }

    #[test]
    fn free_space_cases() {
        assert_eq!(free_space(0.0).unwrap(), TransferMatrix::IDENTITY);
        assert_eq!(free_space(3.0).unwrap(), TransferMatrix::new(1.0, 3.0, 0.0, 1.0));
        let sum = free_space(1.0).unwrap().then(&free_space(2.0).unwrap());
        assert_eq!(sum, free_space(3.0).unwrap());
        assert!(matches!(free_space(-0.1), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn ideal_cat_eye() {
        let m = cat_eye_matrix(0.05, 0.05).unwrap();
        assert!(m.approx_eq(&TransferMatrix::new(-1.0, 0.1, 0.0, -1.0), 1e-15));
        assert!((m.determinant() - 1.0).abs() < 1e-12);
        assert!(cat_eye_matrix(0.0, 0.05).is_err());
        assert!(cat_eye_matrix(0.05, -1.0).is_err());
    }

    #[test]
    fn general_cat_eye_matches_symbolic_product() {
        // lens·drift(2l)·lens multiplied out by hand:
        // [[1 - 2l/f, 2l], [2(l - f)/f², 1 - 2l/f]]
        for &(f, l) in &[(0.05, 0.04), (0.03, 0.07), (0.1, 0.1), (0.02, 0.021)] {
            let m = cat_eye_matrix(f, l).unwrap();
            let s = 1.0 - 2.0 * l / f;
            let expected = TransferMatrix::new(s, 2.0 * l, 2.0 * (l - f) / (f * f), s);
            assert!(m.approx_eq(&expected, 1e-12), "{m:?} vs {expected:?}");
            assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cat_eye_squared_preserves_direction() {
        // Two back-to-back retro-reflections keep ray direction (A = D = 1,
        // C = 0) and leave a residual drift of -4f.
        let m = cat_eye_matrix(0.05, 0.05).unwrap();
        let twice = m.then(&free_space(0.0).unwrap()).then(&m);
        assert!(twice.approx_eq(&TransferMatrix::new(1.0, -0.2, 0.0, 1.0), 1e-14));
        assert!((twice.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn misalignment_terms() {
        let zero = MisalignmentVector::default();
        for formula in [MisalignmentFormula::Literal, MisalignmentFormula::Rederived] {
            let t = cat_eye_misalignment(0.05, 0.05, zero, formula).unwrap();
            assert_eq!((t.e, t.f_term), (0.0, 0.0));
        }
        let d = MisalignmentVector::offset(0.1);
        let literal = cat_eye_misalignment(0.05, 0.05, d, MisalignmentFormula::Literal).unwrap();
        assert!((literal.e - (-0.2)).abs() < 1e-12);
        assert!((literal.f_term - 76.0).abs() < 1e-9);
        let re = cat_eye_misalignment(0.05, 0.05, d, MisalignmentFormula::Rederived).unwrap();
        assert!((re.e - 0.2).abs() < 1e-12);
        assert!(re.f_term.abs() < 1e-12);

        let d2 = MisalignmentVector::offset(0.2);
        for formula in [MisalignmentFormula::Literal, MisalignmentFormula::Rederived] {
            let one = cat_eye_misalignment(0.04, 0.045, d, formula).unwrap();
            let two = cat_eye_misalignment(0.04, 0.045, d2, formula).unwrap();
            assert!((two.e - 2.0 * one.e).abs() < 1e-14);
            assert!((two.f_term - 2.0 * one.f_term).abs() < 1e-12);
        }
    }

    #[test]
    fn aligned_round_trip_is_flat_cavity() {
        let cfg = config(0.05, 0.05, 3.0, 0.0);
        let rt = round_trip(&cfg, MisalignmentVector::default()).unwrap();
        assert_eq!((rt.e, rt.f_term), (0.0, 0.0));
        // (cat · drift(d))² with cat = [[-1, 2f], [0, -1]] gives
        // [[1, 2(d - 2f)], [0, 1]].
        assert!(rt.m.approx_eq(&TransferMatrix::new(1.0, 5.8, 0.0, 1.0), 1e-12));
        assert!(matches!(solve_optic_axis(&rt), Err(Error::DegenerateCavity { .. })));
    }

    #[test]
    fn optic_axis_example() {
        let expected = (-0.005 / 2.9, 0.1 / 2.9);
        // Non-ideal gap: unique fixed point.
        let cfg = config(0.05, 0.06, 3.0, 0.1);
        let rt = round_trip(&cfg, cfg.misalignment()).unwrap();
        let axis = solve_optic_axis(&rt).unwrap();
        assert!((axis.r - expected.0).abs() < 1e-12);
        assert!((axis.r_slope - expected.1).abs() < 1e-12);
        let back = rt.apply(axis);
        assert!((back.r - axis.r).abs() < 1e-12 && (back.r_slope - axis.r_slope).abs() < 1e-12);

        // Ideal cat's eye falls back to the focal-point line.
        let ideal = config(0.05, 0.05, 3.0, 0.1);
        let axis = ideal.optic_axis().unwrap();
        assert!((axis.r - expected.0).abs() < 1e-15);
        assert!((axis.r_slope - expected.1).abs() < 1e-15);

        let aligned = config(0.05, 0.06, 3.0, 0.0).optic_axis().unwrap();
        assert_eq!((aligned.r, aligned.r_slope), (0.0, 0.0));
    }

    #[test]
    fn equivalent_resonator() {
        let cfg = CavityConfig::new(
            CatEyeGeometry {
                focal_length: 0.05,
                lens_mirror_gap: 0.05,
                ..Default::default()
            },
            3.0,
            Deflection::Angle(0.0),
        );
        let (length, theta) = equivalent_fp(&cfg).unwrap();
        assert!((length - 2.9).abs() < 1e-12);
        assert_eq!(theta, 0.0);

        let shifted = config(0.05, 0.05, 3.0, 0.1);
        let (length, theta) = equivalent_fp(&shifted).unwrap();
        assert!((theta.tan() - 0.1 / 2.9).abs() < 1e-14);
        assert!((length - (2.9f64.powi(2) + 0.01).sqrt()).abs() < 1e-12);
        let axis = shifted.optic_axis().unwrap();
        assert!((axis.r_slope - theta.tan()).abs() < 1e-14);

        let linked =
            CavityConfig::for_link(CatEyeGeometry::default(), AlgorithmSettings::default(), 3.0, 0.2);
        let (length, theta) = equivalent_fp(&linked).unwrap();
        assert!((length - 3.0).abs() < 1e-12 && (theta - 0.2).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut cfg = config(0.05, 0.05, 0.08, 0.0);
        assert!(matches!(cfg.validate(), Err(Error::InvalidGeometry(_))));
        cfg.separation = 3.0;
        cfg.algorithm.samples = 500;
        assert!(matches!(cfg.validate(), Err(Error::Validation { .. })));
        cfg.algorithm.samples = 512;
        cfg.geometry.reflectivity = 1.2;
        assert!(matches!(cfg.validate(), Err(Error::Validation { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn fixed_point_residual(
                f in 0.01f64..0.1,
                rel in prop_oneof![-0.3f64..-0.01, 0.01f64..0.3],
                d in 0.5f64..10.0,
                delta in -0.5f64..0.5,
            ) {
                let l = f * (1.0 + rel);
                let cfg = config(f, l, d, delta);
                let rt = round_trip(&cfg, cfg.misalignment()).unwrap();
                let m = rt.m;
                let mag = (m.a.abs() + m.b.abs()) * (m.c.abs() + m.d.abs());
                prop_assert!((m.determinant() - 1.0).abs() < 1e-12 * mag.max(1.0));
                let axis = solve_optic_axis(&rt).unwrap();
                let back = rt.apply(axis);
                // Residual relative to the size of the terms being cancelled.
                let scale = (m.a * axis.r).abs() + (m.b * axis.r_slope).abs() + rt.e.abs();
                let sscale =
                    (m.c * axis.r).abs() + (m.d * axis.r_slope).abs() + rt.f_term.abs();
                prop_assert!((back.r - axis.r).abs() <= 1e-10 * scale.max(1e-300));
                prop_assert!((back.r_slope - axis.r_slope).abs() <= 1e-10 * sscale.max(1e-300));
            }

            #[test]
            fn axis_linear_in_offset(
                f in 0.01f64..0.1,
                rel in 0.02f64..0.3,
                d in 0.5f64..10.0,
                delta in 0.001f64..0.2,
            ) {
                let l = f * (1.0 - rel);
                let one = config(f, l, d, delta).optic_axis().unwrap();
                let two = config(f, l, d, 2.0 * delta).optic_axis().unwrap();
                prop_assert!((two.r - 2.0 * one.r).abs() <= 1e-10 * one.r.abs());
                prop_assert!((two.r_slope - 2.0 * one.r_slope).abs() <= 1e-10 * one.r_slope.abs());
            }

            #[test]
            fn augmented_composition_is_associative(
                x in proptest::collection::vec(-2.0f64..2.0, 18),
            ) {
                let t = |o: usize| AugmentedTransfer {
                    m: TransferMatrix::new(x[o], x[o + 1], x[o + 2], x[o + 3]),
                    e: x[o + 4],
                    f_term: x[o + 5],
                };
                let (a, b, c) = (t(0), t(6), t(12));
                let left = a.then(&b).then(&c);
                let right = a.then(&b.then(&c));
                prop_assert!(left.m.approx_eq(&right.m, 1e-12));
                prop_assert!((left.e - right.e).abs() < 1e-12);
                prop_assert!((left.f_term - right.f_term).abs() < 1e-12);
                let id = a.then(&AugmentedTransfer::IDENTITY);
                prop_assert_eq!(id, a);
            }
        }
    }
}
