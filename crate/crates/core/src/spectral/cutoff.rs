use num_complex::Complex64;

use super::field::Field;
use super::grid::Grid;
use super::norms::gradient;
use super::region::{region_distance, Region};
use crate::error::{Error, Result};

/// Relative slack on the gradient bound `‖∇φ‖_∞ ≤ (1+τ)/dist(A,B)`.
pub const CUTOFF_SLACK: f64 = 0.05;

/// A smoothed cutoff with `φ = 0` on `A`, `φ = 1` on `B`.
///
/// Bounds hold off the outer 10% shell of the box, where the periodic wrap of
/// half-space carriers forces a jump.
#[derive(Clone, Debug)]
pub struct Cutoff {
    pub phi: Field,
    pub distance: f64,
    pub slack: f64,
    /// Measured `max |∇φ|` over interior nodes.
    pub max_gradient: f64,
    pub smoothing_width: f64,
}

impl Cutoff {
    pub fn gradient_bound(&self) -> f64 {
        (1.0 + self.slack) / self.distance
    }
}

pub fn cutoff_build(a: &Region, b: &Region, grid: &Grid) -> Result<Cutoff> {
    let dist = region_distance(a, b)?;
    if dist <= 0.0 {
        return Err(Error::TouchingRegions(dist));
    }
    let h = grid.spacing();
    let width = (0.005 * dist).max(h);
    // Gaussian smoothing leaves a deficit width·ψ(margin/width)/ramp at the ramp ends,
    // ψ(a) = E[(Z - a)+] for standard normal Z.
    const PSI: [(f64, f64); 5] = [(1.0, 0.0833), (1.5, 0.0293), (2.0, 0.00849), (2.5, 0.00200), (3.0, 0.000382)];
    let margin = PSI
        .iter()
        .find(|(_, psi)| width * psi / dist <= 2e-4)
        .map_or(3.0, |(c, _)| *c)
        * width;
    let ramp = dist - 2.0 * margin;
    if ramp <= 0.0 || dist / ramp > 1.0 + 0.9 * CUTOFF_SLACK {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {h} too coarse for a cutoff across distance {dist}"
        )));
    }

    let mut buf: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let r = a.distance_to(grid.node(i));
            Complex64::new(((r - margin) / ramp).clamp(0.0, 1.0), 0.0)
        })
        .collect();
    grid.fft_forward(&mut buf);
    for (i, z) in buf.iter_mut().enumerate() {
        *z *= (-0.5 * grid.k_squared(i) * width * width).exp();
    }
    grid.fft_inverse(&mut buf);
    buf.iter_mut().for_each(|z| z.im = 0.0);
    let phi = Field::from_raw(grid, buf);

    let grads = gradient(&phi);
    let max_gradient = (0..grid.len())
        .filter(|&i| !grid.in_outer_shell(i))
        .map(|i| grads.iter().map(|g| g.values()[i].re.powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    let cutoff = Cutoff {
        phi,
        distance: dist,
        slack: CUTOFF_SLACK,
        max_gradient,
        smoothing_width: width,
    };
    if max_gradient > cutoff.gradient_bound() {
        return Err(Error::InvalidParameter(format!(
            "cutoff gradient {max_gradient} exceeds bound {}",
            cutoff.gradient_bound()
        )));
    }
    Ok(cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn ramp_between_half_lines() {
        let g = make_grid(1, 10.0, 4096).unwrap();
        let a = Region::below(0, -1.0);
        let b = Region::above(0, 1.0);
        let c = cutoff_build(&a, &b, &g).unwrap();
        let mid = g.points_per_axis() / 2;
        assert_eq!(g.node(mid)[0], 0.0);
        assert!((c.phi.values()[mid].re - 0.5).abs() <= 0.05);
        assert!(c.max_gradient <= 0.525);
        for i in (0..g.len()).filter(|&i| !g.in_outer_shell(i)) {
            let p = g.node(i);
            let v = c.phi.values()[i].re;
            if b.contains(p) {
                assert!((v - 1.0).abs() <= 1e-3, "x={} phi={}", p[0], v);
            }
            if a.contains(p) {
                assert!(v.abs() <= 1e-3, "x={} phi={}", p[0], v);
            }
        }
    }

    #[test]
    fn ball_source_in_2d() {
        let g = make_grid(2, 8.0, 512).unwrap();
        let a = Region::ball([0.0, 0.0], 1.0).unwrap();
        let b = Region::above(0, 6.0);
        let c = cutoff_build(&a, &b, &g).unwrap();
        assert!(c.max_gradient <= c.gradient_bound());
        for i in (0..g.len()).filter(|&i| !g.in_outer_shell(i)) {
            let p = g.node(i);
            if b.contains(p) {
                assert!((c.phi.values()[i].re - 1.0).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn touching_regions_rejected() {
        let g = make_grid(1, 10.0, 256).unwrap();
        let r = cutoff_build(&Region::below(0, 0.0), &Region::above(0, 0.0), &g);
        assert!(matches!(r, Err(Error::TouchingRegions(_))));
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = make_grid(1, 10.0, 16).unwrap();
        assert!(cutoff_build(&Region::below(0, -0.5), &Region::above(0, 0.5), &g).is_err());
    }
}
