use std::io::Write;

use crate::dynamics::{energy, variance_integral, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::report::{num, opt, write_rows, CsvReport};

/// Variance `V(t) = ‖xu(t)‖₂²` along a run, its second differences and the
/// parabola bound `V(0) + V̇(0)t + 8E(u₀)t²`.
#[derive(Clone, Debug)]
pub struct VirialReport {
    pub times: Vec<f64>,
    pub variance: Vec<f64>,
    /// `V̇(0)` from the one-sided second-order difference `(−3V₀ + 4V₁ − V₂)/(2dt)`.
    pub vdot0: f64,
    /// Centered second differences at `times[1..n-1]`.
    pub second_difference: Vec<f64>,
    pub energy: f64,
    /// `16 E(u₀)`.
    pub bound: f64,
    /// Positive root of the parabola, present only when `E(u₀) < 0`.
    pub t_star: Option<f64>,
    /// Whether `V'' ≤ 16E` is claimed for this flow: `λ = 0`, `σ = 4/d`, or
    /// `σ > 4/d` with `λ > 0`.
    pub asserted: bool,
    /// Final time of a run stopped by blow-up detection.
    pub t_detect: Option<f64>,
}

impl VirialReport {
    /// Largest `V'' − 16E`, relative to `max(|16E|, 1)`.
    pub fn max_excess(&self) -> f64 {
        self.max_excess_before(f64::INFINITY)
    }

    /// [`max_excess`](Self::max_excess) over second differences at times `<= t`.
    pub fn max_excess_before(&self, t: f64) -> f64 {
        let scale = self.bound.abs().max(1.0);
        self.second_difference
            .iter()
            .zip(&self.times[1..])
            .filter(|(_, s)| **s <= t)
            .map(|(d, _)| (d - self.bound) / scale)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V'' ≤ 16E` up to `tol` (relative), or trivially true when not asserted.
    pub fn holds(&self, tol: f64) -> bool {
        !self.asserted || self.max_excess() <= tol
    }

    /// `V(0) + V̇(0)t + 8E t²`.
    pub fn parabola(&self, t: f64) -> f64 {
        self.variance[0] + self.vdot0 * t + 0.5 * self.bound * t * t
    }
}

impl CsvReport for VirialReport {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let n = self.times.len();
        let rows = (0..n).map(|i| {
            let second = i.checked_sub(1).and_then(|j| self.second_difference.get(j)).map_or(String::new(), |s| num(*s));
            vec![
                num(self.times[i]),
                num(self.variance[i]),
                second,
                num(self.parabola(self.times[i])),
                num(self.bound),
                opt(self.t_star),
                opt(self.t_detect),
            ]
        });
        write_rows(w, &["time", "variance", "second_difference", "parabola", "bound", "t_star", "t_detect"], rows)
    }
}

pub fn virial_track(traj: &Trajectory) -> Result<VirialReport> {
    traj.require_every_step()?;
    if traj.harmonic {
        return Err(Error::InvalidParameter("variance identity does not apply to the harmonic flow".into()));
    }
    let n = traj.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 snapshots, got {n}")));
    }
    let params = traj.params;
    let grid = &traj.grid;
    let variance: Vec<f64> = traj.snapshots.iter().map(|u| variance_integral(grid, u.values())).collect();
    let dt = traj.dt;
    // the final snapshot of a terminated run may sit off the uniform step
    let uniform = traj.times.windows(2).take_while(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt).count() + 1;
    let vdot0 = (-3.0 * variance[0] + 4.0 * variance[1] - variance[2]) / (2.0 * dt);
    let second_difference = (1..uniform.min(n) - 1)
        .map(|i| (variance[i + 1] - 2.0 * variance[i] + variance[i - 1]) / (dt * dt))
        .collect();
    let e = energy(&traj.snapshots[0], &params);
    let bound = 16.0 * e;
    let critical = 4.0 / grid.dim() as f64;
    let asserted = params.lambda == 0.0
        || (params.sigma - critical).abs() <= 1e-12
        || (params.sigma > critical && params.lambda > 0.0);
    let t_star = (e < 0.0).then(|| (vdot0 + (vdot0 * vdot0 - 32.0 * e * variance[0]).sqrt()) / (16.0 * e.abs()));
    let t_detect = (traj.terminated_by == Termination::BlowupDetected).then(|| traj.final_time());
    Ok(VirialReport {
        times: traj.times.clone(),
        variance,
        vdot0,
        second_difference,
        energy: e,
        bound,
        t_star,
        asserted,
        t_detect,
    })
}
