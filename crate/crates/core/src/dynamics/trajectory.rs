use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::energy::{coupled_energy_parts, nls_energy_parts, variance_integral};
use super::params::{CoupledParams, NlsParams};
use super::stepper::{Flow, Propagator};
use crate::error::{Error, Result};
use crate::spectral::{gradient_norm, load_snapshot, save_snapshot, Field, Grid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub dt: f64,
    /// Horizon `T`, rounded to a whole number of steps.
    pub horizon: f64,
    pub snapshot_stride: usize,
    pub gradient_blowup_factor: f64,
    pub outer_shell_mass_tol: f64,
    /// Also flag blow-up once `‖∇u‖₂ > guard · max|k| · ‖u‖₂`, i.e. when the
    /// spectrum piles up near the grid cutoff and the run stops resolving the
    /// solution. Zero disables the check.
    pub resolution_guard: f64,
}

impl SolveConfig {
    pub fn new(dt: f64, horizon: f64) -> Result<Self> {
        let cfg = SolveConfig {
            dt,
            horizon,
            snapshot_stride: 1,
            gradient_blowup_factor: 1e3,
            outer_shell_mass_tol: 1e-8,
            resolution_guard: 0.25,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.snapshot_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_shell_tol(mut self, tol: f64) -> Result<Self> {
        self.outer_shell_mass_tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return bad(format!("horizon {} must be at least dt {}", self.horizon, self.dt));
        }
        if self.snapshot_stride == 0 || self.snapshot_stride as f64 * self.dt > self.horizon * (1.0 + 1e-12) {
            return bad(format!("snapshot stride {} incompatible with dt and horizon", self.snapshot_stride));
        }
        if !(self.gradient_blowup_factor > 1.0) {
            return bad(format!("gradient blow-up factor must exceed 1, got {}", self.gradient_blowup_factor));
        }
        if !(self.outer_shell_mass_tol >= 0.0) {
            return bad(format!("shell tolerance must be >= 0, got {}", self.outer_shell_mass_tol));
        }
        if !(self.resolution_guard >= 0.0) {
            return bad(format!("resolution guard must be >= 0, got {}", self.resolution_guard));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    BlowupDetected,
    ShellViolation,
}

impl Termination {
    /// Name used in reports, matching the serialized form.
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Horizon => "horizon",
            Termination::BlowupDetected => "blowup_detected",
            Termination::ShellViolation => "shell_violation",
        }
    }
}

/// Recorded run. Histories are indexed like `times`; `running_sup_grad` is the
/// max of `‖∇u‖₂` over every step taken so far, not only the recorded ones.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    /// Flow parameters; for a coupled run, the single-equation parameters of that component.
    pub params: NlsParams,
    pub harmonic: bool,
    pub dt: f64,
    pub snapshot_stride: usize,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub grad_norms: Vec<f64>,
    pub running_sup_grad: Vec<f64>,
    pub mass_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub shell_history: Vec<f64>,
    pub terminated_by: Termination,
    /// Time of the last step attempted. On overflow this is past the last snapshot.
    pub end_time: f64,
}

impl Trajectory {
    fn empty(grid: &Grid, cfg: &SolveConfig, params: NlsParams, harmonic: bool) -> Self {
        Trajectory {
            grid: grid.clone(),
            params,
            harmonic,
            dt: cfg.dt,
            snapshot_stride: cfg.snapshot_stride,
            times: Vec::new(),
            snapshots: Vec::new(),
            grad_norms: Vec::new(),
            running_sup_grad: Vec::new(),
            mass_history: Vec::new(),
            energy_history: Vec::new(),
            shell_history: Vec::new(),
            terminated_by: Termination::Horizon,
            end_time: 0.0,
        }
    }

    fn push(&mut self, t: f64, values: &[Complex64], d: &Diagnostics, sup: f64) {
        self.times.push(t);
        self.snapshots.push(Field::from_raw(&self.grid, values.to_vec()));
        self.grad_norms.push(d.grad);
        self.running_sup_grad.push(sup);
        self.mass_history.push(d.mass);
        self.energy_history.push(d.energy);
        self.shell_history.push(d.shell);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_field(&self) -> &Field {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// `max_i |m_i − m_0| / m_0`, zero for the zero field.
    pub fn max_mass_drift(&self) -> f64 {
        relative_drift(&self.mass_history)
    }

    pub fn max_energy_drift(&self) -> f64 {
        relative_drift(&self.energy_history)
    }

    /// Errors unless every step was recorded.
    pub fn require_every_step(&self) -> Result<()> {
        if self.snapshot_stride != 1 {
            return Err(Error::StrideRequired(self.snapshot_stride));
        }
        Ok(())
    }

    /// Index of the last snapshot with `time <= t` (within a rounding slack).
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let slack = 1e-9 * self.dt;
        self.times.iter().rposition(|&s| s <= t + slack)
    }

    /// Writes NLSF snapshots, `index.csv` and `run.toml` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("index.csv"))?;
        w.write_record(["time", "mass", "energy", "grad_norm", "sup_grad", "shell_mass"])?;
        for i in 0..self.len() {
            w.serialize((
                self.times[i],
                self.mass_history[i],
                self.energy_history[i],
                self.grad_norms[i],
                self.running_sup_grad[i],
                self.shell_history[i],
            ))?;
            save_snapshot(&dir.join(snapshot_name(i)), &self.snapshots[i], self.times[i])?;
        }
        w.flush()?;
        let meta = RunMeta {
            lambda: self.params.lambda,
            sigma: self.params.sigma,
            harmonic: self.harmonic,
            dt: self.dt,
            snapshot_stride: self.snapshot_stride,
            terminated_by: self.terminated_by,
            end_time: self.end_time,
        };
        let text = toml::to_string(&meta).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(dir.join("run.toml"), text)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join("run.toml"))?;
        let meta: RunMeta = toml::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        let mut r = csv::Reader::from_path(dir.join("index.csv"))?;
        let rows: Vec<(f64, f64, f64, f64, f64, f64)> = r.deserialize().collect::<std::result::Result<_, _>>()?;
        if rows.is_empty() {
            return Err(Error::Format("trajectory index is empty".into()));
        }
        let mut snapshots = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let (field, t) = load_snapshot(&dir.join(snapshot_name(i)))?;
            if t != row.0 {
                return Err(Error::Format(format!("snapshot {i} time {t} disagrees with index {}", row.0)));
            }
            if let Some(first) = snapshots.first() {
                field.check_same_grid(first)?;
            }
            snapshots.push(field);
        }
        Ok(Trajectory {
            grid: snapshots[0].grid().clone(),
            params: NlsParams::new(meta.lambda, meta.sigma)?,
            harmonic: meta.harmonic,
            dt: meta.dt,
            snapshot_stride: meta.snapshot_stride,
            times: rows.iter().map(|r| r.0).collect(),
            mass_history: rows.iter().map(|r| r.1).collect(),
            energy_history: rows.iter().map(|r| r.2).collect(),
            grad_norms: rows.iter().map(|r| r.3).collect(),
            running_sup_grad: rows.iter().map(|r| r.4).collect(),
            shell_history: rows.iter().map(|r| r.5).collect(),
            snapshots,
            terminated_by: meta.terminated_by,
            end_time: meta.end_time,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RunMeta {
    lambda: f64,
    sigma: f64,
    harmonic: bool,
    dt: f64,
    snapshot_stride: usize,
    terminated_by: Termination,
    end_time: f64,
}

fn snapshot_name(i: usize) -> String {
    format!("snap_{i:06}.nlsf")
}

fn relative_drift(h: &[f64]) -> f64 {
    let Some(&first) = h.first() else { return 0.0 };
    let max = h.iter().map(|x| (x - first).abs()).fold(0.0, f64::max);
    if first == 0.0 {
        max
    } else {
        max / first.abs()
    }
}

struct Diagnostics {
    grad: f64,
    mass: f64,
    energy: f64,
    shell: f64,
}

/// Per-run monitor shared by the single and coupled drivers.
struct Monitor {
    cfg: SolveConfig,
    shell_mask: Vec<bool>,
    kmax: f64,
    volume: f64,
}

impl Monitor {
    fn new(grid: &Grid, cfg: &SolveConfig) -> Self {
        Monitor {
            cfg: cfg.clone(),
            shell_mask: (0..grid.len()).map(|i| grid.in_outer_shell(i)).collect(),
            kmax: grid.max_wavenumber(),
            volume: grid.cell_volume(),
        }
    }

    /// Mass and relative shell mass in one sweep.
    fn mass_shell(&self, values: &[Complex64]) -> (f64, f64) {
        let (mut total, mut shell) = (0.0, 0.0);
        for (z, &edge) in values.iter().zip(&self.shell_mask) {
            let m = z.norm_sqr();
            total += m;
            if edge {
                shell += m;
            }
        }
        let frac = if total > 0.0 { shell / total } else { 0.0 };
        (self.volume * total, frac)
    }

    fn blown_up(&self, grad: f64, grad0: f64, mass: f64) -> bool {
        if !grad.is_finite() || !mass.is_finite() {
            return true;
        }
        let factor = grad0 > 0.0 && grad > self.cfg.gradient_blowup_factor * grad0;
        let resolution = self.cfg.resolution_guard > 0.0 && grad > self.cfg.resolution_guard * self.kmax * mass.sqrt();
        factor || resolution
    }

    fn shell_violated(&self, shell: f64) -> bool {
        shell > self.cfg.outer_shell_mass_tol
    }
}

/// Runs the single-equation flow from `u0`.
///
/// Stops at the horizon, on blow-up (gradient growth by the configured factor,
/// loss of resolution, or overflow) or when the outer shell collects mass. The
/// last finite state is always recorded.
pub fn evolve(u0: &Field, params: &NlsParams, cfg: &SolveConfig) -> Result<Trajectory> {
    run(u0, Flow::Nls(*params), cfg)
}

/// Like [`evolve`] for `i u_t + Δu − |x|²u + λ|u|^{4/d}u = 0`.
pub fn evolve_harmonic(u0: &Field, params: &NlsParams, cfg: &SolveConfig) -> Result<Trajectory> {
    run(u0, Flow::Harmonic(*params), cfg)
}

fn run(u0: &Field, flow: Flow, cfg: &SolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = u0.grid();
    flow.validate(grid.dim())?;
    let params = flow.params();
    let prop = Propagator::new(grid, cfg.dt, flow.is_harmonic());
    let mon = Monitor::new(grid, cfg);
    let diag = |values: &[Complex64], grad: f64| {
        let (mass, shell) = mon.mass_shell(values);
        let mut energy = nls_energy_parts(grid, values, grad, &params);
        if flow.is_harmonic() {
            energy += 0.5 * variance_integral(grid, values);
        }
        Diagnostics { grad, mass, energy, shell }
    };

    let mut traj = Trajectory::empty(grid, cfg, params, flow.is_harmonic());
    let grad0 = gradient_norm(u0);
    let d0 = diag(u0.values(), grad0);
    let mut sup = grad0;
    traj.push(0.0, u0.values(), &d0, sup);
    if mon.shell_violated(d0.shell) {
        traj.terminated_by = Termination::ShellViolation;
        return Ok(traj);
    }

    let mut buf = u0.values().to_vec();
    let mut last = buf.clone();
    let steps = cfg.steps();
    for n in 1..=steps {
        let t = n as f64 * cfg.dt;
        traj.end_time = t;
        let grad = prop.step(&mut buf, &flow);
        let (mass, shell) = mon.mass_shell(&buf);
        if !grad.is_finite() || !mass.is_finite() {
            // keep the last finite state as the final snapshot
            let t_prev = (n - 1) as f64 * cfg.dt;
            if traj.final_time() < t_prev {
                let g = gradient_norm(&Field::from_raw(grid, last.clone()));
                traj.push(t_prev, &last, &diag(&last, g), sup);
            }
            traj.terminated_by = Termination::BlowupDetected;
            return Ok(traj);
        }
        sup = sup.max(grad);
        let blow = mon.blown_up(grad, grad0, mass);
        let edge = mon.shell_violated(shell);
        if n % cfg.snapshot_stride == 0 || n == steps || blow || edge {
            traj.push(t, &buf, &diag(&buf, grad), sup);
        }
        if blow {
            traj.terminated_by = Termination::BlowupDetected;
            return Ok(traj);
        }
        if edge {
            traj.terminated_by = Termination::ShellViolation;
            return Ok(traj);
        }
        last.copy_from_slice(&buf);
    }
    Ok(traj)
}

/// Runs the coupled system. Both trajectories share times and termination;
/// their `energy_history` holds the conserved energy of the whole system.
pub fn evolve_coupled(u0: &Field, v0: &Field, cp: &CoupledParams, cfg: &SolveConfig) -> Result<(Trajectory, Trajectory)> {
    cfg.validate()?;
    u0.check_same_grid(v0)?;
    let grid = u0.grid();
    let prop = Propagator::new(grid, cfg.dt, false);
    let mon = Monitor::new(grid, cfg);
    let diags = |u: &[Complex64], v: &[Complex64], gu: f64, gv: f64| {
        let energy = coupled_energy_parts(grid, u, v, (gu, gv), cp);
        let (mu, su) = mon.mass_shell(u);
        let (mv, sv) = mon.mass_shell(v);
        (
            Diagnostics { grad: gu, mass: mu, energy, shell: su },
            Diagnostics { grad: gv, mass: mv, energy, shell: sv },
        )
    };

    let mut tu = Trajectory::empty(grid, cfg, cp.first_component(), false);
    let mut tv = Trajectory::empty(grid, cfg, cp.second_component(), false);
    let (g0u, g0v) = (gradient_norm(u0), gradient_norm(v0));
    let (mut supu, mut supv) = (g0u, g0v);
    let (du, dv) = diags(u0.values(), v0.values(), g0u, g0v);
    tu.push(0.0, u0.values(), &du, supu);
    tv.push(0.0, v0.values(), &dv, supv);
    let finish = |tu: &mut Trajectory, tv: &mut Trajectory, how: Termination| {
        tu.terminated_by = how;
        tv.terminated_by = how;
    };
    if mon.shell_violated(du.shell) || mon.shell_violated(dv.shell) {
        finish(&mut tu, &mut tv, Termination::ShellViolation);
        return Ok((tu, tv));
    }

    let mut u = u0.values().to_vec();
    let mut v = v0.values().to_vec();
    let (mut lastu, mut lastv) = (u.clone(), v.clone());
    let steps = cfg.steps();
    for n in 1..=steps {
        let t = n as f64 * cfg.dt;
        tu.end_time = t;
        tv.end_time = t;
        let (gu, gv) = prop.coupled_step(&mut u, &mut v, cp);
        let (mu, su) = mon.mass_shell(&u);
        let (mv, sv) = mon.mass_shell(&v);
        if !(gu.is_finite() && gv.is_finite() && mu.is_finite() && mv.is_finite()) {
            let t_prev = (n - 1) as f64 * cfg.dt;
            if tu.final_time() < t_prev {
                let gu = gradient_norm(&Field::from_raw(grid, lastu.clone()));
                let gv = gradient_norm(&Field::from_raw(grid, lastv.clone()));
                let (du, dv) = diags(&lastu, &lastv, gu, gv);
                tu.push(t_prev, &lastu, &du, supu);
                tv.push(t_prev, &lastv, &dv, supv);
            }
            finish(&mut tu, &mut tv, Termination::BlowupDetected);
            return Ok((tu, tv));
        }
        supu = supu.max(gu);
        supv = supv.max(gv);
        let blow = mon.blown_up(gu, g0u, mu) || mon.blown_up(gv, g0v, mv);
        let edge = mon.shell_violated(su) || mon.shell_violated(sv);
        if n % cfg.snapshot_stride == 0 || n == steps || blow || edge {
            let (du, dv) = diags(&u, &v, gu, gv);
            tu.push(t, &u, &du, supu);
            tv.push(t, &v, &dv, supv);
        }
        if blow || edge {
            let how = if blow { Termination::BlowupDetected } else { Termination::ShellViolation };
            finish(&mut tu, &mut tv, how);
            return Ok((tu, tv));
        }
        lastu.copy_from_slice(&u);
        lastv.copy_from_slice(&v);
    }
    Ok((tu, tv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn config_validation() {
        assert!(SolveConfig::new(0.0, 1.0).is_err());
        assert!(SolveConfig::new(0.1, 0.01).is_err());
        assert!(SolveConfig::new(0.1, 1.0).unwrap().with_stride(11).is_err());
        assert_eq!(SolveConfig::new(0.1, 1.0).unwrap().steps(), 10);
    }

    #[test]
    fn stride_records_endpoints() {
        let g = make_grid(1, 20.0, 256).unwrap();
        let u = Field::from_real_fn(&g, |p| (-p[0] * p[0]).exp());
        let cfg = SolveConfig::new(0.01, 0.25).unwrap().with_stride(10).unwrap();
        let tr = evolve(&u, &NlsParams::linear(), &cfg).unwrap();
        assert_eq!(tr.len(), 4);
        assert!((tr.times[3] - 0.25).abs() < 1e-12);
        assert_eq!(tr.terminated_by, Termination::Horizon);
        assert!(tr.running_sup_grad.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn shell_violation_at_start() {
        let g = make_grid(1, 5.0, 64).unwrap();
        let u = Field::from_real_fn(&g, |_| 1.0);
        let tr = evolve(&u, &NlsParams::linear(), &SolveConfig::new(0.01, 0.1).unwrap()).unwrap();
        assert_eq!(tr.terminated_by, Termination::ShellViolation);
        assert_eq!(tr.len(), 1);
    }

    #[test]
    fn save_and_load_round_trip() {
        let g = make_grid(1, 20.0, 128).unwrap();
        let u = Field::from_real_fn(&g, |p| (-p[0] * p[0]).exp());
        let cfg = SolveConfig::new(0.01, 0.05).unwrap();
        let tr = evolve(&u, &NlsParams::new(-1.0, 4.0).unwrap(), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        tr.save(dir.path()).unwrap();
        let back = Trajectory::load(dir.path()).unwrap();
        assert_eq!(back.times, tr.times);
        assert_eq!(back.energy_history, tr.energy_history);
        assert_eq!(back.terminated_by, tr.terminated_by);
        assert_eq!(back.final_field().max_abs_diff(tr.final_field()), 0.0);
    }
}
