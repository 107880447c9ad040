use std::f64::consts::PI;
use std::io::Write;

use crate::dynamics::{evolve_harmonic, NlsParams, SolveConfig, Termination};
use crate::error::{Error, Result};
use crate::report::{num, write_rows, CsvReport};
use crate::spectral::{gradient_norm, l2_norm_on, norm_hs, Field, Region};

use super::separation;

/// Time at which the flow of `−Δ + |x|²` acts as the unitary Fourier transform.
pub const LENS_TIME: f64 = PI / 4.0;

/// `‖u‖_Σ = (‖u‖_{H¹}² + ‖xu‖₂²)^{1/2}`.
pub fn sigma_norm(u: &Field) -> Result<f64> {
    let h1 = norm_hs(u, 1.0)?;
    let xu = crate::dynamics::variance_integral(u.grid(), u.values());
    Ok((h1 * h1 + xu).sqrt())
}

#[derive(Clone, Debug)]
pub struct ScatteringReport {
    pub lens_time: f64,
    pub distance: f64,
    /// `‖v(π/4)‖_{L²(B)}`, the scattering state's transform restricted to `B`.
    pub lhs: f64,
    /// `π‖u₀‖_Σ/dist(A,B) + ‖u₀‖_{L²(A^c)}`.
    pub rhs: f64,
    pub margin: f64,
    /// Same bound with the measured `2t sup‖∇v‖₂` in place of `π‖u₀‖_Σ`.
    pub rhs_measured: f64,
    pub sigma_norm: f64,
    pub tail: f64,
    pub terminated_by: Termination,
}

impl CsvReport for ScatteringReport {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let row = vec![
            num(self.lens_time),
            num(self.distance),
            num(self.lhs),
            num(self.rhs),
            num(self.margin),
            num(self.rhs_measured),
            num(self.sigma_norm),
            num(self.tail),
        ];
        write_rows(
            w,
            &["lens_time", "distance", "lhs", "rhs", "margin", "rhs_measured", "sigma_norm", "tail"],
            [row],
        )
    }
}

/// Localization of the scattering state on the frequency side.
///
/// Runs the harmonic flow from `u₀` to [`LENS_TIME`] with step close to
/// `cfg.dt`, then reads the result on node coordinates as the Fourier
/// transform of the scattering state and measures it over `b_freq`.
pub fn scattering_localization(
    u0: &Field,
    a: &Region,
    b_freq: &Region,
    params: &NlsParams,
    cfg: &SolveConfig,
) -> Result<ScatteringReport> {
    if params.lambda > 0.0 {
        return Err(Error::InvalidParameter("scattering localization needs a defocusing flow (lambda <= 0)".into()));
    }
    let distance = separation(a, b_freq)?;
    let steps = (LENS_TIME / cfg.dt).ceil().max(1.0);
    let mut run = cfg.clone();
    run.dt = LENS_TIME / steps;
    run.horizon = LENS_TIME;
    run.snapshot_stride = steps as usize;
    let traj = evolve_harmonic(u0, params, &run)?;
    let v = traj.final_field();
    let tail = l2_norm_on(u0, &a.clone().complement());
    let sn = sigma_norm(u0)?;
    let lhs = l2_norm_on(v, b_freq);
    let rhs = PI * sn / distance + tail;
    let sup = traj.running_sup_grad.last().copied().unwrap_or(gradient_norm(u0));
    Ok(ScatteringReport {
        lens_time: traj.final_time(),
        distance,
        lhs,
        rhs,
        margin: rhs - lhs,
        rhs_measured: 2.0 * LENS_TIME * sup / distance + tail,
        sigma_norm: sn,
        tail,
        terminated_by: traj.terminated_by,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{l2_norm, make_grid};

    #[test]
    fn sigma_norm_of_gaussian() {
        // e^{-x²/2}: ‖u‖² = √π, ‖u'‖² = ‖xu‖² = √π/2
        let g = make_grid(1, 20.0, 1024).unwrap();
        let u = Field::from_real_fn(&g, |p| (-p[0] * p[0] / 2.0).exp());
        assert!((sigma_norm(&u).unwrap() - (2.0 * PI.sqrt()).sqrt()).abs() < 1e-9);
        assert!((l2_norm(&u) - PI.powf(0.25)).abs() < 1e-12);
    }
}
