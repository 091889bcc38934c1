//! Fresnel-Kirchhoff free-space propagation by FFT convolution.
//!
//! Two discretisations of the same integral are available. The impulse
//! response kernel samples the Fresnel chirp `h(x, y)` on the grid and
//! transforms it, so the result is exactly the Riemann sum of the
//! diffraction integral; it needs `dx <= λL/D` for the chirp to be resolved.
//! The transfer function kernel uses the analytic transform of `h` and needs
//! the opposite, `dx >= λL/D_fft`. `Auto` picks whichever holds.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::{Grid, ScalarField2D};
use crate::geometry::KernelChoice;

/// The kernel actually used after resolving [`KernelChoice::Auto`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    ImpulseResponse,
    TransferFunction,
}

/// How the circular FFT convolution is guarded against wrap-around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Padding {
    /// Convolve on the field grid itself. Exact (equal to a linear
    /// convolution) for fields supported on the central `1/G` of a window
    /// built with expand factor `G >= 2`.
    #[default]
    Window,
    /// Zero-pad to twice the grid, giving an exact linear convolution for
    /// arbitrary fields.
    Linear,
}

/// Precomputed propagator for one grid, wavelength and distance.
pub struct Propagator {
    grid: Grid,
    wavelength: f64,
    distance: f64,
    kernel: Kernel,
    padding: Padding,
    fft_len: usize,
    fft: Fft2,
    /// Kernel spectrum in the transposed layout produced by [`Fft2::forward`].
    transfer: Vec<Complex64>,
}

impl Propagator {
    pub fn new(
        grid: Grid,
        wavelength: f64,
        distance: f64,
        choice: KernelChoice,
        padding: Padding,
    ) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "propagation distance must be positive, got {distance}"
            )));
        }
        if !(wavelength > 0.0) {
            return Err(Error::validation("wavelength", "must be positive"));
        }
        let fft_len = match padding {
            Padding::Window => grid.samples,
            Padding::Linear => 2 * grid.samples,
        };
        let kernel = resolve_kernel(grid, wavelength, distance, choice, padding)?;
        let fft = Fft2::new(fft_len);
        let transfer = match kernel {
            Kernel::ImpulseResponse => impulse_spectrum(&fft, fft_len, grid.spacing, wavelength, distance),
            Kernel::TransferFunction => transfer_function(fft_len, grid.spacing, wavelength, distance),
        };
        Ok(Self {
            grid,
            wavelength,
            distance,
            kernel,
            padding,
            fft_len,
            fft,
            transfer,
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }

    pub fn propagate(&self, field: &ScalarField2D) -> Result<ScalarField2D> {
        if field.grid != self.grid {
            return Err(Error::validation(
                "field.grid",
                "does not match the propagator grid",
            ));
        }
        if field.wavelength != self.wavelength {
            return Err(Error::validation(
                "field.wavelength",
                "does not match the propagator wavelength",
            ));
        }
        let m = self.fft_len;
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for (iy, row) in field.values.rows().into_iter().enumerate() {
            for (ix, v) in row.iter().enumerate() {
                buf[iy * m + ix] = *v;
            }
        }
        self.fft.forward(&mut buf);
        buf.iter_mut().zip(&self.transfer).for_each(|(v, h)| *v *= h);
        self.fft.inverse(&mut buf);
        let mut out = ScalarField2D::zeros(self.grid, self.wavelength);
        for ((iy, ix), v) in out.values.indexed_iter_mut() {
            *v = buf[iy * m + ix];
        }
        Ok(out)
    }
}

/// Propagate `field` by `distance` with the automatically chosen kernel and
/// linear (zero-padded) convolution, valid for any field on the grid.
pub fn fresnel_propagate(field: &ScalarField2D, distance: f64) -> Result<ScalarField2D> {
    fresnel_propagate_with(field, distance, KernelChoice::Auto, Padding::Linear)
}

pub fn fresnel_propagate_with(
    field: &ScalarField2D,
    distance: f64,
    kernel: KernelChoice,
    padding: Padding,
) -> Result<ScalarField2D> {
    Propagator::new(field.grid, field.wavelength, distance, kernel, padding)?.propagate(field)
}

/// `λL/D` for the convolution span `D`. The sampled chirp is resolved over
/// every offset the convolution sees when `dx` is at most this, and the
/// analytic transfer function is resolved in frequency when `dx` is at
/// least this.
fn critical_spacing(grid: Grid, wavelength: f64, distance: f64, padding: Padding) -> f64 {
    let span = match padding {
        Padding::Window => grid.window(),
        Padding::Linear => 2.0 * grid.window(),
    };
    wavelength * distance / span
}

fn resolve_kernel(
    grid: Grid,
    wavelength: f64,
    distance: f64,
    choice: KernelChoice,
    padding: Padding,
) -> Result<Kernel> {
    let dx = grid.spacing;
    let ir_max = critical_spacing(grid, wavelength, distance, padding);
    let tf_min = ir_max;
    let window = grid.window();
    match choice {
        KernelChoice::Auto => Ok(if dx <= ir_max {
            Kernel::ImpulseResponse
        } else {
            Kernel::TransferFunction
        }),
        KernelChoice::ImpulseResponse => {
            if dx <= ir_max * (1.0 + 1e-12) {
                Ok(Kernel::ImpulseResponse)
            } else {
                let needed = (window / ir_max).ceil() as usize;
                Err(Error::Sampling {
                    reason: format!(
                        "impulse response undersampled: dx = {dx:.3e} m exceeds λL/D = {ir_max:.3e} m"
                    ),
                    suggested_samples: needed.next_power_of_two(),
                })
            }
        }
        KernelChoice::TransferFunction => {
            if dx >= tf_min * (1.0 - 1e-12) {
                Ok(Kernel::TransferFunction)
            } else {
                let allowed = ((window / tf_min).floor() as usize).max(2);
                let suggested = if allowed.is_power_of_two() {
                    allowed
                } else {
                    allowed.next_power_of_two() / 2
                };
                Err(Error::Sampling {
                    reason: format!(
                        "transfer function undersampled in frequency: dx = {dx:.3e} m below λL/D = {tf_min:.3e} m"
                    ),
                    suggested_samples: suggested,
                })
            }
        }
    }
}

fn wrapped_offset(index: usize, len: usize) -> f64 {
    if index < len / 2 {
        index as f64
    } else {
        index as f64 - len as f64
    }
}

fn impulse_spectrum(fft: &Fft2, len: usize, dx: f64, wavelength: f64, distance: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    let prefactor = Complex64::from_polar(1.0, k * distance) / Complex64::new(0.0, wavelength * distance)
        * (dx * dx);
    let offsets: Vec<f64> = (0..len).map(|i| wrapped_offset(i, len) * dx).collect();
    let mut h = Vec::with_capacity(len * len);
    for &y in &offsets {
        for &x in &offsets {
            h.push(prefactor * Complex64::from_polar(1.0, k * (x * x + y * y) / (2.0 * distance)));
        }
    }
    fft.forward(&mut h);
    h
}

fn transfer_function(len: usize, dx: f64, wavelength: f64, distance: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    let df = 1.0 / (len as f64 * dx);
    let freqs: Vec<f64> = (0..len).map(|i| wrapped_offset(i, len) * df).collect();
    let mut h = Vec::with_capacity(len * len);
    // Symmetric in (fx, fy), so the transposed layout is the same array.
    for &fx in &freqs {
        for &fy in &freqs {
            let phase = k * distance - PI * wavelength * distance * (fx * fx + fy * fy);
            h.push(Complex64::from_polar(1.0, phase));
        }
    }
    h
}
