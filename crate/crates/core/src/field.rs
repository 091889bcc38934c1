//! Sampled scalar fields and binary aperture masks on square grids.

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Square sampling grid centred on the optic axis; sample `i` sits at
/// `(i - n/2)·dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub samples: usize,
    pub spacing: f64,
}

impl Grid {
    pub fn new(samples: usize, spacing: f64) -> Result<Self> {
        if samples < 2 || !samples.is_power_of_two() {
            return Err(Error::validation(
                "grid.samples",
                format!("must be a power of two, got {samples}"),
            ));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::validation(
                "grid.spacing",
                format!("must be positive, got {spacing}"),
            ));
        }
        Ok(Self { samples, spacing })
    }

    /// Grid spanning `window` metres with `samples` points.
    pub fn with_window(samples: usize, window: f64) -> Result<Self> {
        Self::new(samples, window / samples as f64)
    }

    pub fn window(&self) -> f64 {
        self.samples as f64 * self.spacing
    }

    pub fn coordinate(&self, index: usize) -> f64 {
        (index as f64 - (self.samples / 2) as f64) * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.coordinate(i)).collect()
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }
}

/// Complex field amplitude on a square grid. Rows run along y, columns
/// along x.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub values: Array2<Complex64>,
    pub grid: Grid,
    pub wavelength: f64,
}

impl ScalarField2D {
    pub fn zeros(grid: Grid, wavelength: f64) -> Self {
        Self::from_fn(grid, wavelength, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn uniform(grid: Grid, wavelength: f64, value: Complex64) -> Self {
        Self::from_fn(grid, wavelength, |_, _| value)
    }

    /// Build a field from `f(x, y)` evaluated at each sample.
    pub fn from_fn(grid: Grid, wavelength: f64, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let xs = grid.coordinates();
        let values = Array2::from_shape_fn((grid.samples, grid.samples), |(iy, ix)| {
            f(xs[ix], xs[iy])
        });
        Self {
            values,
            grid,
            wavelength,
        }
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// `∬|U|² dx dy`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn intensity(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm_sqr())
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.mapv_inplace(|v| v * factor);
    }

    /// Rescale to unit power; returns the previous power.
    pub fn normalize(&mut self) -> f64 {
        let p = self.power();
        if p > 0.0 {
            self.scale(1.0 / p.sqrt());
        }
        p
    }

    pub fn apply_mask(&mut self, mask: &ApertureMask) {
        Zip::from(&mut self.values)
            .and(&mask.values)
            .for_each(|v, &m| {
                if !m {
                    *v = Complex64::new(0.0, 0.0);
                }
            });
    }

    pub fn masked(mut self, mask: &ApertureMask) -> Self {
        self.apply_mask(mask);
        self
    }

    /// Distance between the normalised shapes of two fields, minimised over a
    /// global phase: `sqrt(2 - 2|<u, v>|)` for unit-power `u`, `v`.
    pub fn shape_distance(&self, other: &ScalarField2D) -> f64 {
        let pa: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        let pb: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        if pa == 0.0 || pb == 0.0 {
            return if pa == pb { 0.0 } else { 2f64.sqrt() };
        }
        let inner: Complex64 = Zip::from(&self.values)
            .and(&other.values)
            .fold(Complex64::new(0.0, 0.0), |acc, a, b| acc + a.conj() * b);
        let corr = inner.norm() / (pa * pb).sqrt();
        (2.0 - 2.0 * corr).max(0.0).sqrt()
    }

    /// Centroid of `|U|²` (x, y).
    pub fn centroid(&self) -> Result<(f64, f64)> {
        let m = self.moments()?;
        Ok((m.0, m.1))
    }

    fn moments(&self) -> Result<(f64, f64, f64, f64)> {
        let xs = self.grid.coordinates();
        let mut total = 0.0;
        let (mut sx, mut sy) = (0.0, 0.0);
        for ((iy, ix), v) in self.values.indexed_iter() {
            let p = v.norm_sqr();
            total += p;
            sx += p * xs[ix];
            sy += p * xs[iy];
        }
        if !(total > 0.0) {
            return Err(Error::UndefinedRadius);
        }
        let (cx, cy) = (sx / total, sy / total);
        let (mut vx, mut vy) = (0.0, 0.0);
        for ((iy, ix), v) in self.values.indexed_iter() {
            let p = v.norm_sqr();
            vx += p * (xs[ix] - cx).powi(2);
            vy += p * (xs[iy] - cy).powi(2);
        }
        Ok((cx, cy, vx / total, vy / total))
    }

    /// Write `|U|²` as a dense row-major CSV matrix preceded by a comment
    /// header carrying the grid spacing and wavelength.
    pub fn write_intensity_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut body = || -> std::io::Result<()> {
            writeln!(
                out,
                "# dx_m={:e},wavelength_m={:e},samples={}",
                self.grid.spacing, self.wavelength, self.grid.samples
            )?;
            for row in self.values.rows() {
                let line: Vec<String> = row.iter().map(|v| format!("{:e}", v.norm_sqr())).collect();
                writeln!(out, "{}", line.join(","))?;
            }
            out.flush()
        };
        body().map_err(|e| Error::io(path, e))
    }
}

/// Second-moment (D4σ/2) radius of `|U|²`, referenced to its centroid:
/// `w = sqrt(2(σx² + σy²))`. Equals the 1/e² radius of a Gaussian and
/// the edge radius of a uniform disc.
pub fn beam_radius(field: &ScalarField2D) -> Result<f64> {
    let (_, _, vx, vy) = field.moments()?;
    Ok((2.0 * (vx + vy)).sqrt())
}

/// Binary indicator of the active reflecting area.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureMask {
    pub values: Array2<bool>,
    pub grid: Grid,
}

impl ApertureMask {
    pub fn open(grid: Grid) -> Self {
        Self::from_fn(grid, |_, _| true)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> bool) -> Self {
        let xs = grid.coordinates();
        let values = Array2::from_shape_fn((grid.samples, grid.samples), |(iy, ix)| {
            f(xs[ix], xs[iy])
        });
        Self { values, grid }
    }

    /// Circle of `radius` centred at `(cx, cy)`.
    pub fn disc(grid: Grid, radius: f64, cx: f64, cy: f64) -> Self {
        let r2 = radius * radius;
        Self::from_fn(grid, |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r2)
    }

    pub fn intersect(&self, other: &ApertureMask) -> ApertureMask {
        let mut values = self.values.clone();
        Zip::from(&mut values)
            .and(&other.values)
            .for_each(|a, &b| *a = *a && b);
        ApertureMask {
            values,
            grid: self.grid,
        }
    }

    pub fn open_pixels(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn area(&self) -> f64 {
        self.open_pixels() as f64 * self.grid.cell_area()
    }

    pub fn is_closed(&self) -> bool {
        self.open_pixels() == 0
    }
}
