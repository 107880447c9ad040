use std::io::Write;

use rayon::prelude::*;

use super::strichartz::{strichartz_of_fields, StrichartzOrder};
use crate::dynamics::{evolve, evolve_coupled, CoupledParams, NlsParams, SolveConfig, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::report::{num, opt, write_rows, CsvReport};
use crate::spectral::{norm_hs, shell_mass_fraction, Field, Grid};

/// Verdict of a sweep with no qualifying row.
pub const NOT_REACHED: &str = "not reached on sampled range";

/// Single-equation concatenation study: the combined datum at distance `D` is
/// `u₀(·+De₁) + v₀(·−De₁) + w₀`.
#[derive(Clone, Debug)]
pub struct ConcatScenario {
    pub u0: Field,
    pub v0: Field,
    pub w0: Field,
    /// Increasing translation distances, snapped to whole cells when run.
    pub distances: Vec<f64>,
    pub params: NlsParams,
    /// Shared by every run; `horizon` is the time `T`.
    pub solve: SolveConfig,
    /// Order of the extra difference norm reported next to the `S⁰` proxy.
    pub order: StrichartzOrder,
}

/// Two-component analog with vector data `(first, second)`.
#[derive(Clone, Debug)]
pub struct CoupledScenario {
    pub u0: [Field; 2],
    pub v0: [Field; 2],
    pub w0: [Field; 2],
    pub distances: Vec<f64>,
    pub params: CoupledParams,
    pub solve: SolveConfig,
}

fn check_distances(distances: &[f64]) -> Result<()> {
    if distances.is_empty() {
        return Err(Error::InvalidParameter("distance list is empty".into()));
    }
    if distances.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidParameter(format!("distances must be finite and >= 0: {distances:?}")));
    }
    if distances.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("distances must be increasing: {distances:?}")));
    }
    Ok(())
}

/// Rejects a scenario whose translates at the largest distance already put
/// mass in the outer shell.
fn check_fits(grid: &Grid, parts: &[(&Field, &Field, &Field)], d_max: f64, tol: f64) -> Result<()> {
    let cells = snap_distance(grid, d_max).0;
    for (u, v, w) in parts {
        let combined = &(&u.roll([-cells, 0]) + &v.roll([cells, 0])) + w;
        let frac = shell_mass_fraction(&combined);
        if frac > tol {
            return Err(Error::InvalidParameter(format!(
                "translates at D = {d_max} reach the outer shell (relative mass {frac:.3e} > {tol:.3e})"
            )));
        }
    }
    Ok(())
}

impl ConcatScenario {
    pub fn validate(&self) -> Result<()> {
        self.u0.check_same_grid(&self.v0)?;
        self.u0.check_same_grid(&self.w0)?;
        self.solve.validate()?;
        check_distances(&self.distances)?;
        check_fits(
            self.u0.grid(),
            &[(&self.u0, &self.v0, &self.w0)],
            *self.distances.last().unwrap(),
            self.solve.outer_shell_mass_tol,
        )
    }
}

impl CoupledScenario {
    pub fn validate(&self) -> Result<()> {
        for f in self.u0.iter().chain(&self.v0).chain(&self.w0) {
            self.u0[0].check_same_grid(f)?;
        }
        self.solve.validate()?;
        check_distances(&self.distances)?;
        check_fits(
            self.u0[0].grid(),
            &[(&self.u0[0], &self.v0[0], &self.w0[0]), (&self.u0[1], &self.v0[1], &self.w0[1])],
            *self.distances.last().unwrap(),
            self.solve.outer_shell_mass_tol,
        )
    }
}

/// Nearest whole number of cells to `d` along `e₁`, and the snapped distance.
pub fn snap_distance(grid: &Grid, d: f64) -> (isize, f64) {
    let cells = (d / grid.spacing()).round() as isize;
    (cells, cells as f64 * grid.spacing())
}

/// Rescales `w₀` so that `‖w₀‖_{H¹} = ratio · ‖u₀‖_{H¹}`; the zero field stays zero.
pub fn scale_perturbation(w0: &Field, u0: &Field, ratio: f64) -> Result<Field> {
    let nw = norm_hs(w0, 1.0)?;
    if nw == 0.0 {
        return Ok(w0.clone());
    }
    Ok(w0.scale((ratio * norm_hs(u0, 1.0)? / nw).into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcatRow {
    /// Snapped distance.
    pub d: f64,
    /// Whether the combined run reached `T`.
    pub exists: bool,
    /// False once any run or translate touched the outer shell.
    pub valid: bool,
    pub terminated_by: Termination,
    pub end_time: f64,
    /// Difference norm in the `S⁰` proxy, max over components.
    pub eps: f64,
    /// Difference norm in the scenario's order (single equation only).
    pub eps_s: Option<f64>,
    /// Per-component `S⁰` proxies of a coupled run.
    pub eps_components: Option<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct ConcatReport {
    pub eps_target: f64,
    /// Order used for `eps_s`; fractional orders are interpolated proxies.
    pub order: StrichartzOrder,
    pub rows: Vec<ConcatRow>,
    /// First listed distance with a valid row, existence to `T` and `eps ≤ eps_target`.
    pub minimal_d: Option<f64>,
    pub verdict: String,
}

impl ConcatReport {
    fn collect(rows: Vec<ConcatRow>, eps_target: f64, order: StrichartzOrder) -> Self {
        let minimal_d = rows.iter().find(|r| r.valid && r.exists && r.eps <= eps_target).map(|r| r.d);
        let verdict = match minimal_d {
            Some(d) => format!("reached at D = {d}"),
            None => NOT_REACHED.to_string(),
        };
        ConcatReport { eps_target, order, rows, minimal_d, verdict }
    }

    /// `eps` never increases along the distance list.
    pub fn eps_nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].eps <= w[0].eps)
    }

    pub fn all_reach_horizon(&self) -> bool {
        self.rows.iter().all(|r| r.exists)
    }
}

fn order_label(order: StrichartzOrder) -> String {
    match order {
        StrichartzOrder::Zero => "0".into(),
        StrichartzOrder::One => "1".into(),
        StrichartzOrder::Fractional(s) => format!("{s} (interpolated proxy)"),
    }
}

impl CsvReport for ConcatReport {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = self.rows.iter().map(|r| {
            let [first, second] = r.eps_components.map(|c| c.map(Some)).unwrap_or([None, None]);
            vec![
                num(r.d),
                r.exists.to_string(),
                r.valid.to_string(),
                r.terminated_by.label().to_string(),
                num(r.end_time),
                num(r.eps),
                opt(r.eps_s),
                order_label(self.order),
                opt(first),
                opt(second),
                num(self.eps_target),
                opt(self.minimal_d),
                self.verdict.clone(),
            ]
        });
        write_rows(
            w,
            &[
                "d",
                "exists",
                "valid",
                "terminated_by",
                "end_time",
                "eps",
                "eps_s",
                "order",
                "eps_first",
                "eps_second",
                "eps_target",
                "minimal_d",
                "verdict",
            ],
            rows,
        )
    }
}

/// One component of a run, with the power used in its difference norm.
struct Component<'a> {
    combined: &'a Trajectory,
    u_alone: &'a Trajectory,
    v_alone: &'a Trajectory,
    sigma: f64,
}

/// Builds a row from the combined run and the centered solo runs, which are
/// translated by whole cells instead of being rerun.
fn assemble_row(
    parts: &[Component],
    cells: isize,
    d: f64,
    tol: f64,
    order: Option<StrichartzOrder>,
) -> Result<ConcatRow> {
    let lead = parts[0].combined;
    let mut valid = true;
    let mut per_component = Vec::with_capacity(parts.len());
    let mut eps_s = None;
    for c in parts {
        let solo_edge = [c.combined, c.u_alone, c.v_alone].iter().any(|t| t.terminated_by == Termination::ShellViolation);
        valid &= !solo_edge;
        let common = c
            .combined
            .times
            .iter()
            .zip(&c.u_alone.times)
            .zip(&c.v_alone.times)
            .take_while(|((a, b), e)| (*a - *b).abs() <= 1e-9 && (*a - *e).abs() <= 1e-9)
            .count();
        let mut diff = Vec::with_capacity(common);
        for i in 0..common {
            let u = c.u_alone.snapshots[i].roll([-cells, 0]);
            let v = c.v_alone.snapshots[i].roll([cells, 0]);
            valid &= shell_mass_fraction(&u) <= tol && shell_mass_fraction(&v) <= tol;
            diff.push(&(&c.combined.snapshots[i] - &u) - &v);
        }
        let times = &c.combined.times[..common];
        per_component.push(strichartz_of_fields(times, &diff, c.sigma, StrichartzOrder::Zero, None)?);
        if let Some(order) = order.filter(|o| *o != StrichartzOrder::Zero) {
            eps_s = Some(strichartz_of_fields(times, &diff, c.sigma, order, None)?);
        }
    }
    let eps = per_component.iter().copied().fold(0.0, f64::max);
    Ok(ConcatRow {
        d,
        exists: lead.terminated_by == Termination::Horizon,
        valid,
        terminated_by: lead.terminated_by,
        end_time: lead.end_time,
        eps,
        eps_s: if order.is_some() { eps_s.or(Some(eps)) } else { None },
        eps_components: (parts.len() == 2).then(|| [per_component[0], per_component[1]]),
    })
}

fn combined_datum(u: &Field, v: &Field, w: &Field, cells: isize) -> Field {
    &(&u.roll([-cells, 0]) + &v.roll([cells, 0])) + w
}

fn single_row(sc: &ConcatScenario, solo: &(Trajectory, Trajectory), d: f64) -> Result<ConcatRow> {
    let (cells, snapped) = snap_distance(sc.u0.grid(), d);
    let combined = evolve(&combined_datum(&sc.u0, &sc.v0, &sc.w0, cells), &sc.params, &sc.solve)?;
    let part = Component { combined: &combined, u_alone: &solo.0, v_alone: &solo.1, sigma: sc.params.sigma };
    assemble_row(&[part], cells, snapped, sc.solve.outer_shell_mass_tol, Some(sc.order))
}

fn single_solo(sc: &ConcatScenario) -> Result<(Trajectory, Trajectory)> {
    let (u, v) = rayon::join(|| evolve(&sc.u0, &sc.params, &sc.solve), || evolve(&sc.v0, &sc.params, &sc.solve));
    Ok((u?, v?))
}

/// One row of the sweep at distance `d`.
pub fn concat_run(sc: &ConcatScenario, d: f64) -> Result<ConcatRow> {
    sc.validate()?;
    single_row(sc, &single_solo(sc)?, d)
}

/// Runs every listed distance in parallel and reports the minimal one
/// meeting `eps_target`.
pub fn d_sweep(sc: &ConcatScenario, eps_target: f64) -> Result<ConcatReport> {
    sc.validate()?;
    let solo = single_solo(sc)?;
    let rows = sc.distances.par_iter().map(|&d| single_row(sc, &solo, d)).collect::<Result<Vec<_>>>()?;
    Ok(ConcatReport::collect(rows, eps_target, sc.order))
}

type Pair = (Trajectory, Trajectory);

fn coupled_row(sc: &CoupledScenario, solo: &(Pair, Pair), d: f64) -> Result<ConcatRow> {
    let (cells, snapped) = snap_distance(sc.u0[0].grid(), d);
    let a = combined_datum(&sc.u0[0], &sc.v0[0], &sc.w0[0], cells);
    let b = combined_datum(&sc.u0[1], &sc.v0[1], &sc.w0[1], cells);
    let combined = evolve_coupled(&a, &b, &sc.params, &sc.solve)?;
    let (su, sv) = solo;
    let sigma = 2.0 * sc.params.p;
    let parts = [
        Component { combined: &combined.0, u_alone: &su.0, v_alone: &sv.0, sigma },
        Component { combined: &combined.1, u_alone: &su.1, v_alone: &sv.1, sigma },
    ];
    assemble_row(&parts, cells, snapped, sc.solve.outer_shell_mass_tol, None)
}

fn coupled_solo(sc: &CoupledScenario) -> Result<(Pair, Pair)> {
    let (u, v) = rayon::join(
        || evolve_coupled(&sc.u0[0], &sc.u0[1], &sc.params, &sc.solve),
        || evolve_coupled(&sc.v0[0], &sc.v0[1], &sc.params, &sc.solve),
    );
    Ok((u?, v?))
}

/// Coupled analog of [`concat_run`]: `eps` is the max of the component `S⁰` proxies.
pub fn coupled_concat_run(sc: &CoupledScenario, d: f64) -> Result<ConcatRow> {
    sc.validate()?;
    coupled_row(sc, &coupled_solo(sc)?, d)
}

pub fn coupled_d_sweep(sc: &CoupledScenario, eps_target: f64) -> Result<ConcatReport> {
    sc.validate()?;
    let solo = coupled_solo(sc)?;
    let rows = sc.distances.par_iter().map(|&d| coupled_row(sc, &solo, d)).collect::<Result<Vec<_>>>()?;
    Ok(ConcatReport::collect(rows, eps_target, StrichartzOrder::Zero))
}
