use num_complex::Complex64;

use super::params::{CoupledParams, NlsParams};
use crate::spectral::{gradient_norm, pow_abs, Field, Grid};

/// `h^d Σ |u|^q`.
pub(crate) fn power_integral(grid: &Grid, values: &[Complex64], q: f64) -> f64 {
    grid.cell_volume() * values.iter().map(|z| pow_abs(z.norm_sqr(), q)).sum::<f64>()
}

/// `h^d Σ |x|² |u|²`.
pub(crate) fn variance_integral(grid: &Grid, values: &[Complex64]) -> f64 {
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let p = grid.node(i);
            (p[0] * p[0] + p[1] * p[1]) * z.norm_sqr()
        })
        .sum();
    grid.cell_volume() * s
}

pub(crate) fn nls_energy_parts(grid: &Grid, values: &[Complex64], grad: f64, params: &NlsParams) -> f64 {
    let potential = if params.lambda == 0.0 {
        0.0
    } else {
        params.lambda / (params.sigma + 2.0) * power_integral(grid, values, params.sigma + 2.0)
    };
    0.5 * grad * grad - potential
}

/// `E(u) = ½‖∇u‖₂² − λ/(σ+2) ‖u‖_{σ+2}^{σ+2}`.
pub fn energy(u: &Field, params: &NlsParams) -> f64 {
    nls_energy_parts(u.grid(), u.values(), gradient_norm(u), params)
}

/// Energy of the harmonic flow, `E(u) + ½‖xu‖₂²`.
pub fn harmonic_energy(u: &Field, params: &NlsParams) -> f64 {
    energy(u, params) + 0.5 * variance_integral(u.grid(), u.values())
}

pub(crate) fn coupled_energy_parts(
    grid: &Grid,
    u: &[Complex64],
    v: &[Complex64],
    grads: (f64, f64),
    cp: &CoupledParams,
) -> f64 {
    let q = 2.0 * cp.p + 2.0;
    let pp = cp.p + 1.0;
    let cross: f64 = u.iter().zip(v).map(|(a, b)| pow_abs(a.norm_sqr(), pp) * pow_abs(b.norm_sqr(), pp)).sum();
    0.5 * (grads.0 * grads.0 + grads.1 * grads.1)
        - (cp.k11 * power_integral(grid, u, q) + cp.k22 * power_integral(grid, v, q)) / q
        - cp.k12 / pp * grid.cell_volume() * cross
}

/// Conserved energy of the coupled system,
/// `½(‖∇u‖² + ‖∇v‖²) − (k11‖u‖^{2p+2} + k22‖v‖^{2p+2})/(2p+2) − k12/(p+1) ∫|u|^{p+1}|v|^{p+1}`.
pub fn coupled_energy(u: &Field, v: &Field, cp: &CoupledParams) -> f64 {
    coupled_energy_parts(u.grid(), u.values(), v.values(), (gradient_norm(u), gradient_norm(v)), cp)
}
