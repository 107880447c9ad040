use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A node position. One-dimensional grids leave the second coordinate at zero.
pub type Point = [f64; 2];

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

struct GridData {
    dim: usize,
    half_width: f64,
    points: usize,
    spacing: f64,
    coords: Vec<f64>,
    /// Wavenumbers in FFT storage order (0, 1, .., N/2-1, -N/2, .., -1) times pi/L.
    fft_k: Vec<f64>,
    plans: OnceLock<Plans>,
}

/// Uniform periodic discretization of the box `[-L, L)^d`.
///
/// Cheap to clone; clones share coordinates and FFT plans.
#[derive(Clone)]
pub struct Grid(Arc<GridData>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.0.dim)
            .field("half_width", &self.0.half_width)
            .field("points", &self.0.points)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.dim == other.0.dim
                && self.0.points == other.0.points
                && self.0.half_width == other.0.half_width)
    }
}

/// Builds a grid with `n` points per axis on `[-half_width, half_width)^dim`.
pub fn make_grid(dim: usize, half_width: f64, n: usize) -> Result<Grid> {
    Grid::new(dim, half_width, n)
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} unsupported (1 or 2)")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        let spacing = 2.0 * half_width / n as f64;
        let coords = (0..n).map(|j| -half_width + j as f64 * spacing).collect();
        let dk = PI / half_width;
        let half = n as i64 / 2;
        let fft_k = (0..n as i64)
            .map(|j| if j < half { j } else { j - n as i64 })
            .map(|j| j as f64 * dk)
            .collect();
        Ok(Grid(Arc::new(GridData {
            dim,
            half_width,
            points: n,
            spacing,
            coords,
            fft_k,
            plans: OnceLock::new(),
        })))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn half_width(&self) -> f64 {
        self.0.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.0.points
    }

    pub fn spacing(&self) -> f64 {
        self.0.spacing
    }

    /// Total node count `N^d`.
    pub fn len(&self) -> usize {
        self.0.points.pow(self.0.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.0.spacing.powi(self.0.dim as i32)
    }

    /// Node coordinates along one axis, ascending from `-L`.
    pub fn axis_coords(&self) -> &[f64] {
        &self.0.coords
    }

    /// Wavenumbers `(pi/L) j`, `j = -N/2 .. N/2-1`, ascending.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.0.points;
        let dk = PI / self.0.half_width;
        (0..n).map(|j| (j as f64 - (n / 2) as f64) * dk).collect()
    }

    /// Wavenumbers in FFT storage order.
    pub fn fft_wavenumbers(&self) -> &[f64] {
        &self.0.fft_k
    }

    /// Largest `|k|` over the spectral lattice.
    pub fn max_wavenumber(&self) -> f64 {
        (self.0.dim as f64).sqrt() * PI / self.0.spacing
    }

    /// Multi-index of a flat row-major node index.
    #[inline]
    pub fn index(&self, flat: usize) -> [usize; 2] {
        if self.0.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.0.points, flat % self.0.points]
        }
    }

    #[inline]
    pub fn node(&self, flat: usize) -> Point {
        let [i, j] = self.index(flat);
        if self.0.dim == 1 {
            [self.0.coords[i], 0.0]
        } else {
            [self.0.coords[i], self.0.coords[j]]
        }
    }

    /// Squared wavenumber magnitude at a flat index in FFT storage order.
    #[inline]
    pub fn k_squared(&self, flat: usize) -> f64 {
        let [i, j] = self.index(flat);
        let k = &self.0.fft_k;
        if self.0.dim == 1 {
            k[i] * k[i]
        } else {
            k[i] * k[i] + k[j] * k[j]
        }
    }

    /// Wavevector at a flat index in FFT storage order.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> Point {
        let [i, j] = self.index(flat);
        let k = &self.0.fft_k;
        if self.0.dim == 1 {
            [k[i], 0.0]
        } else {
            [k[i], k[j]]
        }
    }

    /// Nodes lying in the outer 10% shell, `max_a |x_a| >= 0.9 L`.
    pub fn in_outer_shell(&self, flat: usize) -> bool {
        let p = self.node(flat);
        let edge = 0.9 * self.0.half_width;
        p[..self.0.dim].iter().any(|x| x.abs() >= edge)
    }

    fn plans(&self) -> &Plans {
        self.0.plans.get_or_init(|| {
            let mut planner = FftPlanner::new();
            Plans {
                forward: planner.plan_fft_forward(self.0.points),
                inverse: planner.plan_fft_inverse(self.0.points),
            }
        })
    }

    /// Unnormalized forward DFT over all axes, in place.
    pub fn fft_forward(&self, buf: &mut [Complex64]) {
        let plan = Arc::clone(&self.plans().forward);
        self.transform(buf, plan.as_ref());
    }

    /// Inverse DFT over all axes, in place, including the `1/N^d` factor.
    pub fn fft_inverse(&self, buf: &mut [Complex64]) {
        let plan = Arc::clone(&self.plans().inverse);
        self.transform(buf, plan.as_ref());
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, buf: &mut [Complex64], plan: &dyn Fft<f64>) {
        debug_assert_eq!(buf.len(), self.len());
        plan.process(buf);
        if self.0.dim == 2 {
            let n = self.0.points;
            let mut t = transpose(buf, n);
            plan.process(&mut t);
            let back = transpose(&t, n);
            buf.copy_from_slice(&back);
        }
    }
}

fn transpose(buf: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); buf.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = buf[i * n + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_spacing_and_wavenumbers() {
        let g = make_grid(1, 10.0, 16).unwrap();
        assert_eq!(g.spacing(), 1.25);
        let k = g.wavenumbers();
        assert_eq!(k.len(), 16);
        for (j, kj) in k.iter().enumerate() {
            let expected = (PI / 10.0) * (j as f64 - 8.0);
            assert!((kj - expected).abs() < 1e-15);
        }
        // symmetric except the Nyquist mode
        for j in 1..8 {
            assert!((k[8 + j] + k[8 - j]).abs() < 1e-14);
        }
    }

    #[test]
    fn two_dimensional_node_count() {
        let g = make_grid(2, 20.0, 256).unwrap();
        assert_eq!(g.len(), 65536);
        assert_eq!(g.node(257), [-20.0 + 0.15625, -20.0 + 0.15625]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(make_grid(1, 10.0, 17).is_err());
        assert!(make_grid(1, 10.0, 8).is_err());
        assert!(make_grid(1, 0.0, 16).is_err());
        assert!(make_grid(1, -1.0, 16).is_err());
        assert!(make_grid(3, 1.0, 16).is_err());
    }

    #[test]
    fn fft_round_trip_2d() {
        let g = make_grid(2, 3.0, 16).unwrap();
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut buf = orig.clone();
        g.fft_forward(&mut buf);
        g.fft_inverse(&mut buf);
        let err = buf
            .iter()
            .zip(&orig)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }
}
