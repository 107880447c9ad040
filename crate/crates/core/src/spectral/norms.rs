//! Norms of fields: global and region-restricted Lebesgue norms, spectral
//! gradients and Sobolev `H^s` norms.
//!
//! Fourier convention: `û_k = h^d Σ_j u(x_j) e^{-i k·x_j}`. Under it the
//! discrete Plancherel identity reads `Σ_x h^d |u|² = (2L)^{-d} Σ_k |û_k|²`.
//! All sums run sequentially in row-major order so results are bitwise
//! reproducible.

use num_complex::Complex64;

use super::field::Field;
use super::grid::Grid;
use super::region::Region;
use crate::error::{Error, Result};

/// `(h^d Σ_{x_j ∈ R} |u(x_j)|^p)^{1/p}`; `p = ∞` gives the max over nodes in `R`.
///
/// An empty intersection of `R` with the grid returns 0.
pub fn norm_lp(u: &Field, p: f64, region: Option<&Region>) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Lebesgue exponent must be >= 1, got {p}")));
    }
    Ok(lp_unchecked(u.grid(), u.values(), p, region))
}

pub(crate) fn lp_unchecked(grid: &Grid, values: &[Complex64], p: f64, region: Option<&Region>) -> f64 {
    let inside = |i: usize| region.map_or(true, |r| r.contains(grid.node(i)));
    if p.is_infinite() {
        return values
            .iter()
            .enumerate()
            .filter(|(i, _)| inside(*i))
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
    }
    let sum: f64 = values
        .iter()
        .enumerate()
        .filter(|(i, _)| inside(*i))
        .map(|(_, z)| pow_abs(z.norm_sqr(), p))
        .sum();
    (grid.cell_volume() * sum).powf(1.0 / p)
}

/// `|z|^p` from `|z|²`, with exact fast paths for even integer powers.
#[inline]
pub(crate) fn pow_abs(norm_sqr: f64, p: f64) -> f64 {
    let half = 0.5 * p;
    if half.fract() == 0.0 && half <= 8.0 {
        norm_sqr.powi(half as i32)
    } else {
        norm_sqr.powf(half)
    }
}

pub fn l2_norm(u: &Field) -> f64 {
    lp_unchecked(u.grid(), u.values(), 2.0, None)
}

pub fn l2_norm_on(u: &Field, region: &Region) -> f64 {
    lp_unchecked(u.grid(), u.values(), 2.0, Some(region))
}

/// Mass `‖u‖₂²`.
pub fn mass(u: &Field) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Spectrum in the documented convention, FFT storage order.
pub fn fourier_transform(u: &Field) -> Vec<Complex64> {
    let grid = u.grid();
    let mut buf = u.values().to_vec();
    grid.fft_forward(&mut buf);
    let l = grid.half_width();
    let hd = grid.cell_volume();
    for (i, z) in buf.iter_mut().enumerate() {
        // x_j = -L + j h, so e^{-ik x_j} = e^{ikL} e^{-ik j h}
        let k = grid.wavevector(i);
        let shift = (k[0] + k[1]) * l;
        *z *= hd * Complex64::from_polar(1.0, shift);
    }
    buf
}

/// Plancherel weight `(2L)^{-d}` pairing with [`fourier_transform`].
pub fn plancherel_weight(grid: &Grid) -> f64 {
    (2.0 * grid.half_width()).powi(-(grid.dim() as i32))
}

/// Spectral gradient, one field per axis: inverse transform of `i k_a û`.
pub fn gradient(u: &Field) -> Vec<Field> {
    let grid = u.grid();
    let mut spec = u.values().to_vec();
    grid.fft_forward(&mut spec);
    (0..grid.dim())
        .map(|axis| {
            let mut buf: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(i, z)| z * Complex64::new(0.0, grid.wavevector(i)[axis]))
                .collect();
            grid.fft_inverse(&mut buf);
            Field::from_raw(grid, buf)
        })
        .collect()
}

/// `‖∇u‖₂` via Plancherel on the raw DFT.
pub fn gradient_norm(u: &Field) -> f64 {
    let mut spec = u.values().to_vec();
    u.grid().fft_forward(&mut spec);
    gradient_norm_from_dft(u.grid(), &spec)
}

/// `‖∇u‖₂` from an unnormalized DFT of `u`.
pub(crate) fn gradient_norm_from_dft(grid: &Grid, dft: &[Complex64]) -> f64 {
    let s: f64 = dft
        .iter()
        .enumerate()
        .map(|(i, z)| grid.k_squared(i) * z.norm_sqr())
        .sum();
    (grid.cell_volume() / grid.len() as f64 * s).sqrt()
}

/// Sobolev norm `(Σ_k (1+|k|²)^s |û_k|² w)^{1/2}` with `w` the Plancherel weight.
pub fn norm_hs(u: &Field, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("Sobolev order must be >= 0, got {s}")));
    }
    let grid = u.grid();
    let mut spec = u.values().to_vec();
    grid.fft_forward(&mut spec);
    let total: f64 = spec
        .iter()
        .enumerate()
        .map(|(i, z)| (1.0 + grid.k_squared(i)).powf(s) * z.norm_sqr())
        .sum();
    // raw DFT: |û|² = h^{2d} |U|², weight (2L)^{-d} = 1/(h N)^d
    Ok((grid.cell_volume() / grid.len() as f64 * total).sqrt())
}

/// `‖ |∇u| ‖_p`, the Lebesgue norm of the pointwise gradient magnitude.
pub fn gradient_lp(u: &Field, p: f64) -> Result<f64> {
    let g = gradient(u);
    let grid = u.grid();
    let mag: Vec<Complex64> = (0..grid.len())
        .map(|i| Complex64::new(g.iter().map(|c| c.values()[i].norm_sqr()).sum::<f64>().sqrt(), 0.0))
        .collect();
    norm_lp(&Field::from_raw(grid, mag), p, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn gaussian(grid: &Grid) -> Field {
        Field::from_real_fn(grid, |p| (-(p[0] * p[0]) / 2.0).exp())
    }

    #[test]
    fn zero_field_norms_vanish() {
        let g = make_grid(1, 5.0, 64).unwrap();
        let z = Field::zeros(&g);
        assert_eq!(norm_lp(&z, 2.0, None).unwrap(), 0.0);
        assert_eq!(norm_hs(&z, 1.0).unwrap(), 0.0);
        assert_eq!(norm_lp(&z, f64::INFINITY, None).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_l2_and_half_line() {
        let g = make_grid(1, 20.0, 2048).unwrap();
        let u = gaussian(&g);
        let exact = PI.powf(0.25);
        let n = norm_lp(&u, 2.0, None).unwrap();
        assert!((n - exact).abs() / exact < 1e-10);
        // the node at x = 0 belongs to neither open half-line
        let right = norm_lp(&u, 2.0, Some(&Region::above(0, 0.0))).unwrap();
        let left = norm_lp(&u, 2.0, Some(&Region::below(0, 0.0))).unwrap();
        assert!((right - left).abs() < 1e-14);
        let origin_mass = g.spacing();
        assert!(((2.0 * right * right + origin_mass) - exact * exact).abs() < 1e-10);
        assert!((right - exact / 2f64.sqrt()).abs() / exact < 5e-3);
    }

    #[test]
    fn empty_region_gives_zero() {
        let g = make_grid(1, 5.0, 64).unwrap();
        let u = gaussian(&g);
        assert_eq!(norm_lp(&u, 2.0, Some(&Region::above(0, 100.0))).unwrap(), 0.0);
        assert!(norm_lp(&u, 0.5, None).is_err());
    }

    #[test]
    fn fourier_mode_gradient() {
        let g = make_grid(1, 10.0, 128).unwrap();
        let k0 = 5.0 * PI / 10.0;
        let u = Field::from_fn(&g, |p| Complex64::from_polar(1.0, k0 * p[0]));
        let du = &gradient(&u)[0];
        let err = du
            .values()
            .iter()
            .zip(u.values())
            .map(|(d, z)| (d - Complex64::new(0.0, k0) * z).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
        let c = Field::from_fn(&g, |_| Complex64::new(2.0, -1.0));
        assert!(gradient(&c)[0].values().iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn gaussian_derivative() {
        let g = make_grid(1, 20.0, 2048).unwrap();
        let u = gaussian(&g);
        let du = &gradient(&u)[0];
        let err = (0..g.len())
            .map(|i| {
                let x = g.node(i)[0];
                (du.values()[i] - Complex64::new(-x * (-x * x / 2.0).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8);
        // ∫ x² e^{-x²} = √π/2
        let gn = gradient_norm(&u);
        assert!((gn * gn - PI.sqrt() / 2.0).abs() < 1e-8);
        let direct = l2_norm(du);
        assert!((direct - gn).abs() < 1e-12);
    }

    #[test]
    fn sobolev_norms() {
        let g = make_grid(1, 20.0, 2048).unwrap();
        let u = gaussian(&g);
        let h0 = norm_hs(&u, 0.0).unwrap();
        assert!((h0 - l2_norm(&u)).abs() / h0 < 1e-12);
        let h1 = norm_hs(&u, 1.0).unwrap();
        let exact = (PI.sqrt() * 1.5).sqrt();
        assert!((h1 - exact).abs() / exact < 1e-8);
    }

    #[test]
    fn convention_transform_of_gaussian() {
        // ∫ e^{-x²/2} e^{-ikx} dx = √(2π) e^{-k²/2}
        let g = make_grid(1, 20.0, 512).unwrap();
        let spec = fourier_transform(&gaussian(&g));
        for (i, z) in spec.iter().enumerate() {
            let k = g.fft_wavenumbers()[i];
            let exact = (2.0 * PI).sqrt() * (-k * k / 2.0).exp();
            assert!((z - Complex64::new(exact, 0.0)).norm() < 1e-10, "k={k} z={z}");
        }
        let w = plancherel_weight(&g);
        let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() * w;
        assert!((total - PI.sqrt()).abs() < 1e-10);
    }
}
