use num_complex::Complex64;

use super::params::{CoupledParams, NlsParams};
use crate::error::{Error, Result};
use crate::spectral::{gradient_norm_from_dft, pow_abs, Field, Grid};

/// Which flow a [`Propagator`] advances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Flow {
    /// `i u_t + Δu + λ|u|^σ u = 0`; `λ = 0` is the free Schrödinger flow.
    Nls(NlsParams),
    /// `i u_t + Δu − |x|²u + λ|u|^σ u = 0`.
    Harmonic(NlsParams),
}

impl Flow {
    pub fn params(&self) -> NlsParams {
        match self {
            Flow::Nls(p) | Flow::Harmonic(p) => *p,
        }
    }

    pub fn is_harmonic(&self) -> bool {
        matches!(self, Flow::Harmonic(_))
    }

    /// The harmonic flow is only defined at the mass-critical power. A vanishing
    /// coupling makes `σ` irrelevant and is always accepted.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Flow::Harmonic(p) = self {
            let critical = 4.0 / dim as f64;
            if p.lambda != 0.0 && (p.sigma - critical).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "harmonic flow requires sigma = 4/d = {critical}, got {}",
                    p.sigma
                )));
            }
        }
        Ok(())
    }
}

/// Precomputed Strang split-step for a fixed grid and time step.
///
/// Each step works in place and returns `‖∇u‖₂` of the new state, read off the
/// spectrum before the final inverse transform.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: Grid,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    potential: Option<Vec<f64>>,
}

impl Propagator {
    pub fn new(grid: &Grid, dt: f64, harmonic: bool) -> Self {
        let multiplier = |tau: f64| -> Vec<Complex64> {
            (0..grid.len())
                .map(|i| Complex64::from_polar(1.0, -grid.k_squared(i) * tau))
                .collect()
        };
        let potential = harmonic.then(|| {
            (0..grid.len())
                .map(|i| {
                    let p = grid.node(i);
                    p[0] * p[0] + p[1] * p[1]
                })
                .collect()
        });
        Propagator {
            grid: grid.clone(),
            dt,
            half: multiplier(0.5 * dt),
            full: multiplier(dt),
            potential,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Exact free step `û ← e^{−i|k|²dt} û`.
    pub fn linear_step(&self, buf: &mut [Complex64]) -> f64 {
        self.grid.fft_forward(buf);
        mul(buf, &self.full);
        let g = gradient_norm_from_dft(&self.grid, buf);
        self.grid.fft_inverse(buf);
        g
    }

    /// One Strang step of `flow`. A pure linear flow takes the exact full step.
    pub fn step(&self, buf: &mut [Complex64], flow: &Flow) -> f64 {
        let p = flow.params();
        if p.lambda == 0.0 && self.potential.is_none() {
            return self.linear_step(buf);
        }
        self.half_step(buf);
        let dt = self.dt;
        match &self.potential {
            None => {
                for z in buf.iter_mut() {
                    let theta = (p.lambda * pow_abs(z.norm_sqr(), p.sigma)) * dt;
                    *z *= Complex64::from_polar(1.0, theta);
                }
            }
            Some(pot) => {
                for (z, w) in buf.iter_mut().zip(pot) {
                    let theta = (p.lambda * pow_abs(z.norm_sqr(), p.sigma) - w) * dt;
                    *z *= Complex64::from_polar(1.0, theta);
                }
            }
        }
        self.finish_step(buf)
    }

    /// One Strang step of the coupled system. Both moduli are frozen during the
    /// phase rotation, so the nonlinear substep is exact.
    pub fn coupled_step(&self, u: &mut [Complex64], v: &mut [Complex64], cp: &CoupledParams) -> (f64, f64) {
        self.half_step(u);
        self.half_step(v);
        let dt = self.dt;
        let (p2, pp, pm) = (2.0 * cp.p, cp.p + 1.0, cp.p - 1.0);
        for (a, b) in u.iter_mut().zip(v.iter_mut()) {
            let (ma, mb) = (a.norm_sqr(), b.norm_sqr());
            let theta_u = (cp.k11 * pow_abs(ma, p2) + cp.k12 * (pow_abs(mb, pp) * pow_abs(ma, pm))) * dt;
            let theta_v = (cp.k22 * pow_abs(mb, p2) + cp.k12 * (pow_abs(ma, pp) * pow_abs(mb, pm))) * dt;
            *a *= Complex64::from_polar(1.0, theta_u);
            *b *= Complex64::from_polar(1.0, theta_v);
        }
        (self.finish_step(u), self.finish_step(v))
    }

    fn half_step(&self, buf: &mut [Complex64]) {
        self.grid.fft_forward(buf);
        mul(buf, &self.half);
        self.grid.fft_inverse(buf);
    }

    fn finish_step(&self, buf: &mut [Complex64]) -> f64 {
        self.grid.fft_forward(buf);
        mul(buf, &self.half);
        let g = gradient_norm_from_dft(&self.grid, buf);
        self.grid.fft_inverse(buf);
        g
    }
}

fn mul(buf: &mut [Complex64], m: &[Complex64]) {
    for (z, w) in buf.iter_mut().zip(m) {
        *z *= w;
    }
}

fn checked(grid: &Grid, values: Vec<Complex64>) -> Result<Field> {
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::BlowUp("non-finite values after nonlinear substep".into()));
    }
    Ok(Field::from_raw(grid, values))
}

pub fn step_linear(u: &Field, dt: f64) -> Field {
    let mut buf = u.values().to_vec();
    Propagator::new(u.grid(), dt, false).linear_step(&mut buf);
    Field::from_raw(u.grid(), buf)
}

/// One Strang step. Overflow of `|u|^σ` surfaces as [`Error::BlowUp`].
pub fn step_nls(u: &Field, params: &NlsParams, dt: f64) -> Result<Field> {
    let mut buf = u.values().to_vec();
    Propagator::new(u.grid(), dt, false).step(&mut buf, &Flow::Nls(*params));
    checked(u.grid(), buf)
}

pub fn step_harmonic_nls(u: &Field, params: &NlsParams, dt: f64) -> Result<Field> {
    let flow = Flow::Harmonic(*params);
    flow.validate(u.grid().dim())?;
    let mut buf = u.values().to_vec();
    Propagator::new(u.grid(), dt, true).step(&mut buf, &flow);
    checked(u.grid(), buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn single_mode_phase() {
        let g = make_grid(1, 10.0, 128).unwrap();
        let k0 = 3.0 * std::f64::consts::PI / 10.0;
        let u = Field::from_fn(&g, |p| Complex64::from_polar(1.0, k0 * p[0]));
        let w = step_linear(&u, 0.1);
        let expect = u.scale(Complex64::from_polar(1.0, -k0 * k0 * 0.1));
        assert!(w.max_abs_diff(&expect) < 1e-12);
        assert!(step_linear(&u, 0.0).max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn zero_stays_zero() {
        let g = make_grid(1, 10.0, 64).unwrap();
        let z = Field::zeros(&g);
        let p = NlsParams::new(1.0, 4.0).unwrap();
        assert_eq!(step_nls(&z, &p, 0.01).unwrap().max_abs_diff(&z), 0.0);
        assert_eq!(step_harmonic_nls(&z, &p, 0.01).unwrap().max_abs_diff(&z), 0.0);
    }

    #[test]
    fn harmonic_requires_critical_power() {
        let g = make_grid(1, 10.0, 64).unwrap();
        let z = Field::zeros(&g);
        assert!(step_harmonic_nls(&z, &NlsParams::new(1.0, 2.0).unwrap(), 0.01).is_err());
    }

    #[test]
    fn overflow_is_a_blowup_signal() {
        let g = make_grid(1, 10.0, 64).unwrap();
        let u = Field::from_real_fn(&g, |p| 1e200 * (-p[0] * p[0]).exp());
        let r = step_nls(&u, &NlsParams::new(1.0, 4.0).unwrap(), 0.01);
        assert!(matches!(r, Err(Error::BlowUp(_))));
    }
}
