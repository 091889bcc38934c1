//! Square 2-D FFT built from row transforms and a blocked in-place transpose.
//!
//! `forward` leaves the spectrum transposed (`out[kx][ky]`) and `inverse`
//! expects that layout, which saves two transposes per convolution.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const BLOCK: usize = 32;

pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalised forward transform of a row-major `n x n` buffer; the
    /// result is stored transposed.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&self.forward, data);
    }

    /// Inverse of [`Fft2::forward`], including the `1/n²` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(&self.inverse, data);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n * self.n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, self.n);
        plan.process_with_scratch(data, &mut scratch);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for bi in (0..n).step_by(BLOCK) {
        for bj in (bi..n).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(n) {
                let j0 = if bi == bj { i + 1 } else { bj };
                for j in j0..(bj + BLOCK).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft2(input: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for ky in 0..n {
            for kx in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..n {
                    for x in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((kx * x + ky * y) as f64) / n as f64;
                        acc += input[y * n + x] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[ky * n + kx] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_transform() {
        let n = 16;
        let input: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let reference = naive_dft2(&input, n);
        let fft = Fft2::new(n);
        let mut data = input.clone();
        fft.forward(&mut data);
        for ky in 0..n {
            for kx in 0..n {
                let got = data[kx * n + ky];
                assert!((got - reference[ky * n + kx]).norm() < 1e-10);
            }
        }
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&input) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn transpose_large_blocks() {
        let n = 100;
        let mut data: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        transpose_square(&mut data, n);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(data[i * n + j].re, (j * n + i) as f64);
            }
        }
    }
}
