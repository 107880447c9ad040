use std::ops::{Add, Sub};

use num_complex::Complex64;

use super::grid::{Grid, Point};
use crate::error::{Error, Result};

/// Complex samples on the nodes of a [`Grid`], row-major over axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at node {i}")));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    /// Unchecked constructor for kernels whose output is checked downstream.
    pub(crate) fn from_raw(grid: &Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(Point) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(Point) -> f64) -> Self {
        Self::from_fn(grid, |p| Complex64::new(f(p), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Point, Complex64) -> Complex64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &z)| f(self.grid.node(i), z))
            .collect();
        Field::from_raw(&self.grid, values)
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field::from_raw(&self.grid, self.values.iter().map(|z| z * c).collect())
    }

    pub fn conj(&self) -> Field {
        Field::from_raw(&self.grid, self.values.iter().map(|z| z.conj()).collect())
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Periodic shift by whole cells: `result(x) = self(x - shift*h)`.
    pub fn roll(&self, shift: [isize; 2]) -> Field {
        let n = self.grid.points_per_axis() as isize;
        let wrap = |i: usize, s: isize| ((i as isize - s).rem_euclid(n)) as usize;
        let values = if self.grid.dim() == 1 {
            (0..n as usize).map(|i| self.values[wrap(i, shift[0])]).collect()
        } else {
            let nu = n as usize;
            (0..self.grid.len())
                .map(|f| {
                    let (i, j) = (f / nu, f % nu);
                    self.values[wrap(i, shift[0]) * nu + wrap(j, shift[1])]
                })
                .collect()
        };
        Field::from_raw(&self.grid, values)
    }

    /// Band-limited translation by an arbitrary vector: `result(x) = self(x - shift)`.
    pub fn translate(&self, shift: Point) -> Field {
        let mut buf = self.values.clone();
        self.grid.fft_forward(&mut buf);
        for (i, z) in buf.iter_mut().enumerate() {
            let k = self.grid.wavevector(i);
            let phase = -(k[0] * shift[0] + k[1] * shift[1]);
            *z *= Complex64::from_polar(1.0, phase);
        }
        self.grid.fft_inverse(&mut buf);
        Field::from_raw(&self.grid, buf)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        assert!(self.grid == rhs.grid, "grid mismatch in field addition");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect();
        Field::from_raw(&self.grid, values)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        assert!(self.grid == rhs.grid, "grid mismatch in field subtraction");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        Field::from_raw(&self.grid, values)
    }
}
