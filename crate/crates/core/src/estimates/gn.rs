use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{gradient_norm, l2_norm, lp_unchecked, Field, Grid};

/// Interpolation exponent `θ = dσ/(2(σ+2))` of
/// `‖f‖_{σ+2} ≤ C ‖f‖₂^{1−θ} ‖∇f‖₂^θ`; must lie in `(0, 1)`.
pub fn gn_exponent(dim: usize, sigma: f64) -> Result<f64> {
    let theta = dim as f64 * sigma / (2.0 * (sigma + 2.0));
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "interpolation exponent {theta} outside (0, 1) for d = {dim}, sigma = {sigma}"
        )));
    }
    Ok(theta)
}

/// `‖f‖_{σ+2} / (‖f‖₂^{1−θ} ‖∇f‖₂^θ)` for a nonzero field.
pub fn gn_quotient(f: &Field, sigma: f64) -> Result<f64> {
    let theta = gn_exponent(f.grid().dim(), sigma)?;
    let g = gradient_norm(f);
    let m = l2_norm(f);
    if g == 0.0 || m == 0.0 {
        return Err(Error::InvalidField("quotient undefined for constant or zero fields".into()));
    }
    Ok(lp_unchecked(f.grid(), f.values(), sigma + 2.0, None) / (m.powf(1.0 - theta) * g.powf(theta)))
}

/// Quotient of the Gaussian `e^{−|x|²/2}` in closed form. Dilations and
/// amplitude leave it unchanged.
pub fn gn_gaussian(dim: usize, sigma: f64) -> Result<f64> {
    let theta = gn_exponent(dim, sigma)?;
    let d = dim as f64;
    let q = sigma + 2.0;
    let lq = (2.0 * PI / q).powf(d / (2.0 * q));
    let l2 = PI.powf(d / 4.0);
    let grad = (0.5 * d).sqrt() * PI.powf(d / 4.0);
    Ok(lq / (l2.powf(1.0 - theta) * grad.powf(theta)))
}

/// Largest discrete quotient over Gaussians of widths 0.5, 1, 2 on `grid`.
pub fn calibrate_gn(grid: &Grid, sigma: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for w in [0.5, 1.0, 2.0] {
        let f = Field::from_real_fn(grid, |p| (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * w * w)).exp());
        best = best.max(gn_quotient(&f, sigma)?);
    }
    Ok(best)
}
