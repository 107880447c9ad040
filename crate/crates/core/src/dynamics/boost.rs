use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{gradient, gradient_norm, mass, Field, Point};

/// Split of `‖∇u_b‖₂² = ‖∇u‖₂² + (b²/4)‖u‖₂² + b v·∫Im(ū∇u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostGradient {
    pub base: f64,
    pub kinetic: f64,
    pub cross: f64,
}

impl BoostGradient {
    pub fn total(&self) -> f64 {
        self.base + self.kinetic + self.cross
    }
}

fn unit(dir: Point, dim: usize) -> Result<Point> {
    let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    if (n - 1.0).abs() > 1e-12 || (dim == 1 && dir[1] != 0.0) {
        return Err(Error::InvalidParameter(format!("boost direction ({}, {}) is not a unit vector", dir[0], dir[1])));
    }
    Ok(dir)
}

/// `e^{i(b/2)v·x} u(x)`.
pub fn galilean_boost(u: &Field, b: f64, dir: Point) -> Result<Field> {
    let v = unit(dir, u.grid().dim())?;
    if b == 0.0 {
        return Ok(u.clone());
    }
    Ok(u.map(|p, z| z * Complex64::from_polar(1.0, 0.5 * b * (v[0] * p[0] + v[1] * p[1]))))
}

pub fn boost_gradient(u: &Field, b: f64, dir: Point) -> Result<BoostGradient> {
    let v = unit(dir, u.grid().dim())?;
    let g = gradient_norm(u);
    let grads = gradient(u);
    let mut cross = 0.0;
    for (axis, da) in grads.iter().enumerate() {
        if v[axis] == 0.0 {
            continue;
        }
        let s: f64 = u.values().iter().zip(da.values()).map(|(z, d)| (z.conj() * d).im).sum();
        cross += v[axis] * s * u.grid().cell_volume();
    }
    Ok(BoostGradient {
        base: g * g,
        kinetic: 0.25 * b * b * mass(u),
        cross: b * cross,
    })
}

/// The boosted solution at time `t` built from the unboosted one:
/// `e^{i(b/2)v·(x − (b/2)v t)} u(t, x − b v t)`.
pub fn boost_solution(u_t: &Field, t: f64, b: f64, dir: Point) -> Result<Field> {
    let v = unit(dir, u_t.grid().dim())?;
    let moved = u_t.translate([b * v[0] * t, b * v[1] * t]);
    let shift = 0.5 * b * t;
    Ok(moved.map(|p, z| {
        let phase = 0.5 * b * (v[0] * (p[0] - shift * v[0]) + v[1] * (p[1] - shift * v[1]));
        z * Complex64::from_polar(1.0, phase)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{l2_norm, make_grid};

    #[test]
    fn zero_boost_is_identity() {
        let g = make_grid(1, 10.0, 128).unwrap();
        let u = Field::from_real_fn(&g, |p| (-p[0] * p[0]).exp());
        assert_eq!(galilean_boost(&u, 0.0, [1.0, 0.0]).unwrap().max_abs_diff(&u), 0.0);
        assert!(galilean_boost(&u, 1.0, [0.5, 0.0]).is_err());
    }

    #[test]
    fn real_datum_has_no_cross_term() {
        let g = make_grid(1, 20.0, 1024).unwrap();
        let u = Field::from_real_fn(&g, |p| (-p[0] * p[0]).exp());
        let b = 3.0;
        let ub = galilean_boost(&u, b, [1.0, 0.0]).unwrap();
        assert!((l2_norm(&ub) - l2_norm(&u)).abs() < 1e-12);
        let split = boost_gradient(&u, b, [1.0, 0.0]).unwrap();
        assert!(split.cross.abs() < 1e-12);
        let gb = gradient_norm(&ub).powi(2);
        assert!((gb - split.total()).abs() / gb < 1e-8);
    }

    #[test]
    fn complex_datum_cross_term() {
        let g = make_grid(2, 10.0, 128).unwrap();
        let u = Field::from_fn(&g, |p| Complex64::from_polar((-(p[0] * p[0] + p[1] * p[1])).exp(), 0.7 * p[1]));
        let dir = [0.6, 0.8];
        let split = boost_gradient(&u, 2.0, dir).unwrap();
        assert!(split.cross.abs() > 1e-3);
        let gb = gradient_norm(&galilean_boost(&u, 2.0, dir).unwrap()).powi(2);
        assert!((gb - split.total()).abs() / gb < 1e-8);
    }
}
