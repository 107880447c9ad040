use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::gn::gn_exponent;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::report::{num, write_rows, CsvReport};
use crate::spectral::{cutoff_build, gradient_norm, l2_norm, l2_norm_on, lp_unchecked, Field, Region, Side};

/// Mass outside the nominal support, relative to `‖u₀‖₂`, below which a datum
/// counts as supported in `A`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Discretization slack on margins, relative to `‖u₀‖₂`.
pub const MARGIN_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `supp u₀ ⊂ A`; the tail term is dropped.
    Supported,
    /// Any datum; the bound carries `‖u₀‖_{L²(A^c)}`.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateTag {
    LinearSupported,
    LinearGeneral,
    NlsSupported,
    NlsGeneral,
    LpGn,
    Boosted,
}

impl fmt::Display for EstimateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EstimateTag::LinearSupported => "linear_supported",
            EstimateTag::LinearGeneral => "linear_general",
            EstimateTag::NlsSupported => "nls_supported",
            EstimateTag::NlsGeneral => "nls_general",
            EstimateTag::LpGn => "lp_gn",
            EstimateTag::Boosted => "boosted",
        };
        f.write_str(s)
    }
}

/// Both sides of a disturbance bound at every recorded time.
#[derive(Clone, Debug)]
pub struct DisturbanceReport {
    pub estimate: EstimateTag,
    pub distance: f64,
    /// `‖u₀‖₂`, the scale for [`MARGIN_TOL`].
    pub initial_norm: f64,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margin: Vec<f64>,
}

impl DisturbanceReport {
    fn new(estimate: EstimateTag, distance: f64, initial_norm: f64) -> Self {
        DisturbanceReport {
            estimate,
            distance,
            initial_norm,
            times: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            margin: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, lhs: f64, rhs: f64) {
        self.times.push(t);
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        self.margin.push(rhs - lhs);
    }

    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `margin(t) ≥ −MARGIN_TOL·‖u₀‖₂` at every time.
    pub fn holds(&self) -> bool {
        let tol = MARGIN_TOL * self.initial_norm;
        self.margin.iter().all(|m| *m >= -tol)
    }
}

impl CsvReport for DisturbanceReport {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let tag = self.estimate.to_string();
        let rows = (0..self.times.len()).map(|i| {
            vec![num(self.times[i]), num(self.lhs[i]), num(self.rhs[i]), num(self.margin[i]), tag.clone()]
        });
        write_rows(w, &["time", "lhs", "rhs", "margin", "estimate"], rows)
    }
}

struct Setup {
    distance: f64,
    tail: f64,
    norm: f64,
}

fn setup(u0: &Field, a: &Region, b: &Region, traj: &Trajectory, mode: Mode) -> Result<Setup> {
    if traj.is_empty() || traj.times[0] != 0.0 {
        return Err(Error::Misaligned("trajectory must start at t = 0".into()));
    }
    u0.check_same_grid(&traj.snapshots[0])?;
    if u0.max_abs_diff(&traj.snapshots[0]) != 0.0 {
        return Err(Error::Misaligned("initial datum differs from the first snapshot".into()));
    }
    let distance = super::separation(a, b)?;
    let norm = l2_norm(u0);
    let tail = l2_norm_on(u0, &a.clone().complement());
    if mode == Mode::Supported && tail > SUPPORT_TOL * norm {
        return Err(Error::NotSupported {
            outside: tail,
            allowed: SUPPORT_TOL * norm,
        });
    }
    Ok(Setup { distance, tail, norm })
}

/// `‖u(t)‖_{L²(B)} ≤ 2‖∇u₀‖₂ t/dist(A,B)` (+ `‖u₀‖_{L²(A^c)}` in general mode)
/// along a free Schrödinger trajectory.
pub fn check_disturbance_linear(
    u0: &Field,
    a: &Region,
    b: &Region,
    traj: &Trajectory,
    mode: Mode,
) -> Result<DisturbanceReport> {
    if !traj.params.is_linear() || traj.harmonic {
        return Err(Error::InvalidParameter("linear estimate needs a free Schrödinger trajectory".into()));
    }
    let s = setup(u0, a, b, traj, mode)?;
    let g0 = gradient_norm(u0);
    let (tag, tail) = match mode {
        Mode::Supported => (EstimateTag::LinearSupported, 0.0),
        Mode::General => (EstimateTag::LinearGeneral, s.tail),
    };
    let mut r = DisturbanceReport::new(tag, s.distance, s.norm);
    for (t, u) in traj.times.iter().zip(&traj.snapshots) {
        r.push(*t, l2_norm_on(u, b), 2.0 * g0 * t / s.distance + tail);
    }
    Ok(r)
}

/// Nonlinear analogue with `sup_{s≤t} ‖∇u(s)‖₂` in place of `‖∇u₀‖₂`.
/// Every step must be recorded.
pub fn check_disturbance_nls(
    u0: &Field,
    a: &Region,
    b: &Region,
    traj: &Trajectory,
    mode: Mode,
) -> Result<DisturbanceReport> {
    traj.require_every_step()?;
    let s = setup(u0, a, b, traj, mode)?;
    let (tag, tail) = match mode {
        Mode::Supported => (EstimateTag::NlsSupported, 0.0),
        Mode::General => (EstimateTag::NlsGeneral, s.tail),
    };
    let mut r = DisturbanceReport::new(tag, s.distance, s.norm);
    for i in 0..traj.len() {
        let t = traj.times[i];
        r.push(t, l2_norm_on(&traj.snapshots[i], b), 2.0 * traj.running_sup_grad[i] * t / s.distance + tail);
    }
    Ok(r)
}

/// Boosted bound `t/(dist(A,B)+bt)·(4‖∇u₀‖₂² + b²‖u₀‖₂²)^{1/2}` for a free
/// trajectory and a half-space `B` receding from `A` along its outward normal.
pub fn check_disturbance_boosted(u0: &Field, a: &Region, b: &Region, traj: &Trajectory, boost: f64) -> Result<DisturbanceReport> {
    if !(boost >= 0.0) || !boost.is_finite() {
        return Err(Error::InvalidParameter(format!("boost must be >= 0, got {boost}")));
    }
    if !traj.params.is_linear() || traj.harmonic {
        return Err(Error::InvalidParameter("boosted estimate needs a free Schrödinger trajectory".into()));
    }
    let Region::HalfSpace { axis, side, offset } = *b else {
        return Err(Error::InvalidRegion(format!("boosted estimate needs a half-space observation region, got {b}")));
    };
    let s = setup(u0, a, b, traj, Mode::Supported)?;
    let step = match side {
        Side::Above => 1.0,
        Side::Below => -1.0,
    };
    let moved = Region::HalfSpace { axis, side, offset: offset + step };
    if (super::separation(a, &moved)? - (s.distance + 1.0)).abs() > 1e-12 * (1.0 + s.distance) {
        return Err(Error::InvalidRegion(format!("{b} does not recede from {a} along its normal")));
    }
    let g0 = gradient_norm(u0);
    let speed = (4.0 * g0 * g0 + boost * boost * s.norm * s.norm).sqrt();
    let mut r = DisturbanceReport::new(EstimateTag::Boosted, s.distance, s.norm);
    for (t, u) in traj.times.iter().zip(&traj.snapshots) {
        r.push(*t, l2_norm_on(u, b), t / (s.distance + boost * t) * speed);
    }
    Ok(r)
}

/// One sample of the Lebesgue-norm bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpRecord {
    pub time: f64,
    pub lhs_lp: f64,
    pub rhs_lp: f64,
    pub ratio: f64,
}

/// `‖u(t)‖_{L^{σ+2}(B)} ≤ C (2t‖∇φ‖_∞ sup‖∇u‖₂ + ‖φu₀‖₂)^{1−θ} ‖∇(φu(t))‖₂^θ`,
/// `θ = dσ/(2(σ+2))`, with `φ` from [`cutoff_build`] and `C` a calibrated
/// Gagliardo–Nirenberg constant. Evaluated every `every` snapshots; the
/// trajectory must record every step.
pub fn check_disturbance_lp(
    u0: &Field,
    a: &Region,
    b: &Region,
    traj: &Trajectory,
    c_gn: f64,
    every: usize,
) -> Result<(DisturbanceReport, Vec<LpRecord>)> {
    traj.require_every_step()?;
    let s = setup(u0, a, b, traj, Mode::General)?;
    let grid = u0.grid();
    let q = traj.params.sigma + 2.0;
    let theta = gn_exponent(grid.dim(), traj.params.sigma)?;
    let cutoff = cutoff_build(a, b, grid)?;
    let phi = cutoff.phi.values();
    let weighted = |u: &Field| -> Field {
        let v = u.values().iter().zip(phi).map(|(z, p)| z * p.re).collect();
        Field::from_values(grid, v).expect("finite product")
    };
    let phi_u0 = l2_norm(&weighted(u0));
    let slope = cutoff.gradient_bound();

    let mut report = DisturbanceReport::new(EstimateTag::LpGn, s.distance, s.norm);
    let mut records = Vec::new();
    for i in (0..traj.len()).step_by(every.max(1)) {
        let t = traj.times[i];
        let u = &traj.snapshots[i];
        let lhs = lp_unchecked(grid, u.values(), q, Some(b));
        let mass_bound = 2.0 * t * slope * traj.running_sup_grad[i] + phi_u0;
        let rhs = c_gn * mass_bound.powf(1.0 - theta) * gradient_norm(&weighted(u)).powf(theta);
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        report.push(t, lhs, rhs);
        records.push(LpRecord { time: t, lhs_lp: lhs, rhs_lp: rhs, ratio });
    }
    Ok((report, records))
}

/// Mass outside the light cone `A + B_{γt}(0)` at each snapshot, with the
/// bound `2 sup_{s≤t}‖∇u(s)‖₂/γ` (constant `2‖∇u₀‖₂/γ` for free flows).
#[derive(Clone, Debug)]
pub struct ConeReport {
    pub gamma: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
    /// The cone reaches the outer shell of the box before the last snapshot.
    pub exceeds_box: bool,
}

impl ConeReport {
    pub fn holds(&self) -> bool {
        self.values.iter().zip(&self.bounds).all(|(v, b)| v <= b)
    }
}

impl CsvReport for ConeReport {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = (0..self.times.len()).map(|i| vec![num(self.times[i]), num(self.values[i]), num(self.bounds[i]), num(self.gamma)]);
        write_rows(w, &["time", "value", "bound", "gamma"], rows)
    }
}

pub fn cone_mass(traj: &Trajectory, a: &Region, gamma: f64) -> Result<ConeReport> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("cone speed must be positive, got {gamma}")));
    }
    let u0 = traj.snapshots.first().ok_or_else(|| Error::Misaligned("empty trajectory".into()))?;
    let norm = l2_norm(u0);
    let tail = l2_norm_on(u0, &a.clone().complement());
    if tail > SUPPORT_TOL * norm {
        return Err(Error::NotSupported {
            outside: tail,
            allowed: SUPPORT_TOL * norm,
        });
    }
    let grid = &traj.grid;
    let mut report = ConeReport {
        gamma,
        times: traj.times.clone(),
        values: Vec::with_capacity(traj.len()),
        bounds: Vec::with_capacity(traj.len()),
        exceeds_box: false,
    };
    for i in 0..traj.len() {
        let t = traj.times[i];
        let cone = a.clone().dilate(gamma * t)?;
        report.values.push(l2_norm_on(&traj.snapshots[i], &cone.clone().complement()));
        report.bounds.push(2.0 * traj.running_sup_grad[i] / gamma);
        if i + 1 == traj.len() {
            report.exceeds_box = (0..grid.len()).any(|j| grid.in_outer_shell(j) && cone.contains(grid.node(j)));
        }
    }
    Ok(report)
}
