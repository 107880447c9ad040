use std::io::Write;

use serde::{Deserialize, Serialize};

use super::concat::snap_distance;
use super::strichartz::{s0_parts, s1_proxy};
use crate::dynamics::{evolve, NlsParams, SolveConfig, Termination};
use crate::error::{Error, Result};
use crate::report::{num, write_rows, CsvReport};
use crate::spectral::{gradient_norm, l2_norm, shell_mass_fraction, Field};

/// Largest relative overlap tolerated between translated copies.
pub const OVERLAP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GdVerdict {
    Bounded,
    Undetermined,
}

#[derive(Clone, Debug)]
pub struct GdProxyResult {
    pub horizon: f64,
    pub tail_start: f64,
    /// `S⁰` and `S¹` proxies over the recorded part of `[0, T_h]`.
    pub s0: f64,
    pub s1: f64,
    /// Space-time part of the `S⁰` proxy over `[T_tail, T_h]`; absent when the
    /// run stopped before `T_tail`.
    pub tail: Option<f64>,
    pub bound_m: f64,
    pub tail_eps: f64,
    pub verdict: GdVerdict,
    pub terminated_by: Termination,
    pub end_time: f64,
}

impl CsvReport for GdProxyResult {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let row = vec![
            num(self.horizon),
            num(self.tail_start),
            num(self.s0),
            num(self.s1),
            self.tail.map(num).unwrap_or_default(),
            num(self.bound_m),
            num(self.tail_eps),
            format!("{:?}", self.verdict).to_lowercase(),
            self.terminated_by.label().to_string(),
            num(self.end_time),
        ];
        write_rows(
            w,
            &[
                "horizon",
                "tail_start",
                "s0",
                "s1",
                "tail",
                "bound_m",
                "tail_eps",
                "verdict",
                "terminated_by",
                "end_time",
            ],
            [row],
        )
    }
}

/// Membership proxy for global decaying solutions: bounded iff the run
/// reaches `T_h`, the `S¹` proxy stays below `bound_m`, and the tail over
/// `[T_tail, T_h]` is below `tail_eps`. `cfg.horizon` is replaced by `T_h`.
pub fn gd_proxy(
    u0: &Field,
    params: &NlsParams,
    cfg: &SolveConfig,
    t_h: f64,
    t_tail: f64,
    bound_m: f64,
    tail_eps: f64,
) -> Result<GdProxyResult> {
    if !(t_tail >= 0.0 && t_tail < t_h) {
        return Err(Error::InvalidParameter(format!("need 0 <= T_tail < T_h, got {t_tail} and {t_h}")));
    }
    let mut run = cfg.clone();
    run.horizon = t_h;
    let traj = evolve(u0, params, &run)?;
    let (times, fields, sigma) = (&traj.times, &traj.snapshots, params.sigma);
    let s0 = s0_parts(times, fields, sigma, None)?.total();
    let s1 = s1_proxy(times, fields, sigma, None)?;
    let reached = traj.terminated_by == Termination::Horizon;
    let tail = if traj.final_time() >= t_tail {
        Some(s0_parts(times, fields, sigma, Some((t_tail, t_h)))?.spacetime)
    } else {
        None
    };
    let bounded = reached && s1 <= bound_m && tail.is_some_and(|t| t <= tail_eps);
    Ok(GdProxyResult {
        horizon: t_h,
        tail_start: t_tail,
        s0,
        s1,
        tail,
        bound_m,
        tail_eps,
        verdict: if bounded { GdVerdict::Bounded } else { GdVerdict::Undetermined },
        terminated_by: traj.terminated_by,
        end_time: traj.end_time,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpreadRecord {
    pub n: usize,
    /// Spacing snapped to whole cells.
    pub spacing: f64,
    pub l2: f64,
    pub h1grad: f64,
    pub bump_l2: f64,
    pub bump_h1grad: f64,
    /// Largest `∫|b||b(·−kδe₁)|` over the copy offsets, relative to `‖b‖₂²`.
    pub overlap: f64,
}

impl SpreadRecord {
    /// Measured norms equal `√n` times the bump's to relative `tol`.
    pub fn additive(&self, tol: f64) -> bool {
        let r = (self.n as f64).sqrt();
        (self.l2 - r * self.bump_l2).abs() <= tol * r * self.bump_l2
            && (self.h1grad - r * self.bump_h1grad).abs() <= tol * r * self.bump_h1grad.max(f64::MIN_POSITIVE)
    }
}

impl CsvReport for SpreadRecord {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let row = vec![
            self.n.to_string(),
            num(self.spacing),
            num(self.l2),
            num(self.h1grad),
            num(self.bump_l2),
            num(self.bump_h1grad),
            num(self.overlap),
        ];
        write_rows(w, &["n", "spacing", "l2", "h1grad", "bump_l2", "bump_h1grad", "overlap"], [row])
    }
}

/// Sum of `n` copies of `bump` spaced along `e₁` and centered on the box.
/// Copies must not overlap and the sum must stay clear of the outer shell.
pub fn build_spread_data(bump: &Field, n: usize, spacing: f64, shell_tol: f64) -> Result<(Field, SpreadRecord)> {
    let grid = bump.grid();
    let (cells, snapped) = snap_distance(grid, spacing);
    if n == 0 || (n > 1 && cells < 1) {
        return Err(Error::InvalidParameter(format!("need n >= 1 copies at spacing >= one cell, got {n} at {spacing}")));
    }
    let bump_mass = l2_norm(bump).powi(2);
    if bump_mass == 0.0 {
        return Err(Error::InvalidField("spread data needs a nonzero bump".into()));
    }
    let modulus = Field::from_raw(grid, bump.values().iter().map(|z| z.norm().into()).collect());
    let overlap = (1..n as isize)
        .map(|k| {
            let shifted = modulus.roll([k * cells, 0]);
            let dot: f64 = modulus.values().iter().zip(shifted.values()).map(|(a, b)| a.re * b.re).sum();
            grid.cell_volume() * dot / bump_mass
        })
        .fold(0.0, f64::max);
    if overlap > OVERLAP_TOL {
        return Err(Error::InvalidParameter(format!(
            "copies overlap (relative {overlap:.3e} > {OVERLAP_TOL:e}); increase the spacing"
        )));
    }
    let offset = ((n as isize - 1) * cells) / 2;
    let mut sum = Field::zeros(grid);
    for k in 0..n as isize {
        sum = &sum + &bump.roll([k * cells - offset, 0]);
    }
    let frac = shell_mass_fraction(&sum);
    if frac > shell_tol {
        return Err(Error::InvalidParameter(format!(
            "spread datum reaches the outer shell (relative mass {frac:.3e} > {shell_tol:.3e})"
        )));
    }
    let record = SpreadRecord {
        n,
        spacing: snapped,
        l2: l2_norm(&sum),
        h1grad: gradient_norm(&sum),
        bump_l2: bump_mass.sqrt(),
        bump_h1grad: gradient_norm(bump),
        overlap,
    };
    Ok((sum, record))
}
