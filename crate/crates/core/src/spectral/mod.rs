//! Grids, fields, regions, norms and the spectral operators built on them.

mod cutoff;
mod field;
mod grid;
mod norms;
mod region;
mod snapshot;

pub use cutoff::{cutoff_build, Cutoff, CUTOFF_SLACK};
pub use field::Field;
pub use grid::{make_grid, Grid, Point};
pub use norms::{
    fourier_transform, gradient, gradient_lp, gradient_norm, l2_norm, l2_norm_on, mass, norm_hs,
    norm_lp, plancherel_weight,
};
pub(crate) use norms::{gradient_norm_from_dft, lp_unchecked, pow_abs};
pub use region::{region_distance, Region, Side};
pub use snapshot::{load_snapshot, read_snapshot, save_snapshot, write_snapshot};

/// Relative mass in the outer 10% shell of the box (0 for the zero field).
pub fn shell_mass_fraction(u: &Field) -> f64 {
    let g = u.grid();
    let (mut shell, mut total) = (0.0, 0.0);
    for (i, z) in u.values().iter().enumerate() {
        let m = z.norm_sqr();
        total += m;
        if g.in_outer_shell(i) {
            shell += m;
        }
    }
    if total > 0.0 {
        shell / total
    } else {
        0.0
    }
}
