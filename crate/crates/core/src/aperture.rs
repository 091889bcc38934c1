//! Active reflecting areas of the deflected cat's eyes.

use crate::field::{ApertureMask, Grid};

/// Offset `a = 2f·tanθ` between the two circles bounding the active area.
pub fn lens_offset(focal_length: f64, theta: f64) -> f64 {
    2.0 * focal_length * theta.tan()
}

/// Cat's-eye indicator T1: the lens-shaped overlap of the disc of radius
/// `r` at the origin and the disc of radius `r` centred at `(0, a)`.
/// Above `y = a/2` the boundary is the first circle, below it the second.
pub fn aperture_t1(grid: Grid, radius: f64, theta: f64, focal_length: f64) -> ApertureMask {
    let a = lens_offset(focal_length, theta);
    if a.abs() >= 2.0 * radius {
        log::warn!(
            "deflection {:.2}° closes the cat's-eye aperture (a = {:.4e} m >= 2r)",
            theta.to_degrees(),
            a
        );
        return ApertureMask::from_fn(grid, |_, _| false);
    }
    ApertureMask::disc(grid, radius, 0.0, 0.0).intersect(&ApertureMask::disc(grid, radius, 0.0, a))
}

/// Gain-medium indicator T2: disc of radius `r_g·cosθ` at the origin.
pub fn aperture_t2(grid: Grid, gain_radius: f64, theta: f64) -> ApertureMask {
    ApertureMask::disc(grid, gain_radius * theta.cos(), 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::with_window(512, 48e-3).unwrap()
    }

    #[test]
    fn aligned_t1_is_full_disc() {
        let g = grid();
        let t1 = aperture_t1(g, 12e-3, 0.0, 0.025);
        assert_eq!(t1, ApertureMask::disc(g, 12e-3, 0.0, 0.0));
    }

    #[test]
    fn tangent_circles_close_t1() {
        let g = grid();
        let theta = (12e-3f64 / 0.025).atan();
        assert!(aperture_t1(g, 12e-3, theta, 0.025).is_closed());
        // Just inside the cutoff a thin sliver remains.
        let inner = (11.5e-3f64 / 0.025).atan();
        assert!(!aperture_t1(g, 12e-3, inner, 0.025).is_closed());
    }

    #[test]
    fn t1_shrinks_monotonically() {
        let g = grid();
        let mut last = usize::MAX;
        for deg in 0..=26 {
            let px = aperture_t1(g, 12e-3, (deg as f64).to_radians(), 0.025).open_pixels();
            assert!(px <= last, "{deg}: {px} > {last}");
            last = px;
        }
        assert_eq!(last, 0);
    }

    #[test]
    fn t1_matches_lens_area() {
        // Area of two radius-r circles at distance a:
        // 2r² acos(a/2r) - (a/2) sqrt(4r² - a²).
        let g = Grid::with_window(1024, 48e-3).unwrap();
        let (r, f, theta) = (12e-3f64, 0.025, 10f64.to_radians());
        let a = lens_offset(f, theta);
        let exact = 2.0 * r * r * (a / (2.0 * r)).acos() - 0.5 * a * (4.0 * r * r - a * a).sqrt();
        let area = aperture_t1(g, r, theta, f).area();
        assert!((area / exact - 1.0).abs() < 0.01, "{area} vs {exact}");
        let mirrored = aperture_t1(g, r, -theta, f).area();
        assert!((mirrored / exact - 1.0).abs() < 0.01);
    }

    #[test]
    fn t2_radius() {
        let g = grid();
        assert_eq!(aperture_t2(g, 3e-3, 0.0), ApertureMask::disc(g, 3e-3, 0.0, 0.0));
        let at60 = aperture_t2(g, 3e-3, PI / 3.0);
        assert_eq!(at60, ApertureMask::disc(g, 1.5e-3, 0.0, 0.0));
    }

    #[test]
    fn t2_pixel_area() {
        for &(n, deg) in &[(512usize, 0.0f64), (512, 30.0), (1024, 12.0)] {
            let g = Grid::with_window(n, 48e-3).unwrap();
            let theta = deg.to_radians();
            let exact = PI * (3e-3 * theta.cos()).powi(2);
            let area = aperture_t2(g, 3e-3, theta).area();
            assert!((area / exact - 1.0).abs() < 0.02, "{n} {deg}: {area} vs {exact}");
        }
    }

    #[test]
    fn masks_are_symmetric_about_y_axis() {
        let g = grid();
        let t1 = aperture_t1(g, 12e-3, 0.2, 0.025);
        let n = g.samples;
        // Sample i sits at (i - n/2)·dx, so x -> -x maps i to n - i.
        for iy in 0..n {
            for ix in 1..n {
                assert_eq!(t1.values[[iy, ix]], t1.values[[iy, n - ix]]);
            }
        }
    }
}
