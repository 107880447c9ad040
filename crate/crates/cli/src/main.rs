use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nlslab::config::ExperimentConfig;
use nlslab::dynamics::{evolve, evolve_harmonic, SolveConfig, Termination};
use nlslab::estimates::{
    calibrate_gn, check_disturbance_boosted, check_disturbance_linear, check_disturbance_lp, check_disturbance_nls,
    cone_mass, interaction_norm, scattering_localization, virial_track, DisturbanceReport,
};
use nlslab::experiments::{
    build_spread_data, coupled_d_sweep, d_sweep, gd_proxy, scale_perturbation, snap_distance, ConcatReport,
    ConcatScenario, CoupledScenario, GdProxyResult, GdVerdict,
};
use nlslab::report::{report_path, CsvReport};
use nlslab::spectral::{save_snapshot, Field, Grid};

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Pseudospectral NLS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment definition (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for reports and snapshots.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: number of cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Exit with status 1 when a checked inequality is violated.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the first datum and save the run.
    Simulate(RunArgs),
    /// Finite-speed-of-disturbance checks.
    Disturbance(RunArgs),
    /// Variance identity and blow-up time bound.
    Virial(RunArgs),
    /// Interaction term norms over a separation sweep.
    Interaction(RunArgs),
    /// Concatenation sweep for the single equation.
    Concat(RunArgs),
    /// Frequency localization of the scattering state.
    Lens(RunArgs),
    /// Concatenation sweep for the coupled system.
    Coupled(RunArgs),
    /// Decay-membership proxy.
    Gdproxy(RunArgs),
    /// Spread multi-bump datum and its decay proxy.
    Spread(RunArgs),
    /// Print config diagnostics.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Collects inequality outcomes; only fatal under `--strict`.
struct Checks {
    strict: bool,
    violations: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if ok {
            println!("pass: {}", what.as_ref());
        } else {
            self.violations += 1;
            println!("violation: {}", what.as_ref());
        }
    }

    fn note(&self, what: impl AsRef<str>) {
        println!("note: {}", what.as_ref());
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    grid: Grid,
    out: PathBuf,
    checks: Checks,
}

impl Ctx {
    fn save(&self, report: &impl CsvReport, experiment: &str, tag: &str, value: f64) -> Result<()> {
        let path = report_path(&self.out, experiment, tag, value);
        report.save_csv(&path).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn datum(&self, which: &str) -> Result<Field> {
        Ok(self.cfg.datum(which)?.build(&self.grid))
    }

    fn datum_or_zero(&self, which: &str) -> Field {
        self.cfg.datum(which).map(|d| d.build(&self.grid)).unwrap_or_else(|_| Field::zeros(&self.grid))
    }

    fn solve_every_step(&self) -> Result<SolveConfig> {
        let mut s = self.cfg.solve()?;
        s.snapshot_stride = 1;
        Ok(s)
    }

    fn check_margin(&mut self, r: &DisturbanceReport, label: &str) {
        let tol = self.cfg.thresholds.margin_tol * r.initial_norm;
        self.checks.check(
            r.min_margin() >= -tol,
            format!("{label}: min margin {:.3e} >= -{tol:.3e}", r.min_margin()),
        );
    }
}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    nlslab::Error::Config(msg.into()).into()
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    let diagnostics = cfg.diagnostics();
    if !diagnostics.is_empty() {
        return Err(config_error(diagnostics.join("; ")));
    }
    Ok(cfg)
}

fn simulate(ctx: &mut Ctx) -> Result<()> {
    let u0 = ctx.datum("initial_u")?;
    let params = ctx.cfg.nls()?;
    let solve = ctx.cfg.solve()?;
    let traj = if ctx.cfg.params.harmonic { evolve_harmonic(&u0, &params, &solve)? } else { evolve(&u0, &params, &solve)? };
    traj.save(&ctx.out)?;
    println!(
        "terminated by {} at t = {}; {} snapshots in {}",
        traj.terminated_by.label(),
        traj.end_time,
        traj.len(),
        ctx.out.display()
    );
    println!("energy drift {:.3e}", traj.max_energy_drift());
    ctx.checks.check(traj.max_mass_drift() <= 1e-9, format!("relative mass drift {:.3e} <= 1e-9", traj.max_mass_drift()));
    Ok(())
}

fn disturbance(ctx: &mut Ctx) -> Result<()> {
    let est = ctx.cfg.estimate()?.clone();
    let (a, b) = (est.a.build()?, est.b.build()?);
    let u0 = ctx.datum("initial_u")?;
    let params = ctx.cfg.nls()?;
    let traj = evolve(&u0, &params, &ctx.solve_every_step()?)?;
    if traj.terminated_by != Termination::Horizon {
        ctx.checks.note(format!("run stopped early ({}) at t = {}", traj.terminated_by.label(), traj.end_time));
    }
    let report = if params.is_linear() {
        check_disturbance_linear(&u0, &a, &b, &traj, est.mode.into())?
    } else {
        check_disturbance_nls(&u0, &a, &b, &traj, est.mode.into())?
    };
    let tag = report.estimate.to_string();
    ctx.save(&report, "disturbance", &tag, report.distance)?;
    ctx.check_margin(&report, &tag);
    if !est.boosts.is_empty() && !params.is_linear() {
        return Err(config_error("boosted checks need a linear flow (lambda = 0)"));
    }
    for &boost in &est.boosts {
        let r = check_disturbance_boosted(&u0, &a, &b, &traj, boost)?;
        ctx.save(&r, "disturbance", "boosted", boost)?;
        ctx.check_margin(&r, &format!("boosted b = {boost}"));
    }
    if est.lp {
        let c_gn = match ctx.cfg.thresholds.c_gn {
            Some(c) => c,
            None => calibrate_gn(&ctx.grid, params.sigma)?,
        };
        let (r, _) = check_disturbance_lp(&u0, &a, &b, &traj, c_gn, 1)?;
        ctx.save(&r, "disturbance", "lp_gn", r.distance)?;
        ctx.check_margin(&r, &format!("lp with C_GN = {c_gn:.6}"));
    }
    if let Some(gamma) = est.gamma {
        let r = cone_mass(&traj, &a, gamma)?;
        ctx.save(&r, "cone", "mass", gamma)?;
        ctx.checks.check(r.holds(), format!("cone mass below 2 sup|grad u|/gamma for gamma = {gamma}"));
    }
    Ok(())
}

fn virial(ctx: &mut Ctx) -> Result<()> {
    let u0 = ctx.datum("initial_u")?;
    let solve = ctx.solve_every_step()?;
    let traj = evolve(&u0, &ctx.cfg.nls()?, &solve)?;
    let r = virial_track(&traj)?;
    ctx.save(&r, "virial", "track", solve.horizon)?;
    println!("energy {:.6e}, t* {:?}, t_detect {:?}", r.energy, r.t_star, r.t_detect);
    match (r.t_detect, r.t_star) {
        (Some(td), Some(ts)) => ctx.checks.check(td <= ts, format!("blow-up detected at {td} <= parabola root {ts}")),
        (Some(td), None) => ctx.checks.note(format!("blow-up detected at {td} with nonnegative energy")),
        (None, _) if r.asserted => {
            let tol = ctx.cfg.thresholds.virial_tol;
            ctx.checks.check(r.holds(tol), format!("second difference <= 16E (excess {:.3e}, tol {tol:e})", r.max_excess()))
        }
        (None, _) => ctx.checks.note("no variance bound is claimed for this flow"),
    }
    Ok(())
}

fn interaction(ctx: &mut Ctx) -> Result<()> {
    let params = ctx.cfg.nls()?;
    let solve = ctx.cfg.solve()?;
    let u0 = ctx.datum("initial_u")?;
    let v0 = ctx.datum("initial_v")?;
    if ctx.cfg.sweep.distances.is_empty() {
        return Err(config_error("interaction needs [sweep] distances"));
    }
    let u = evolve(&u0, &params, &solve)?;
    let mut at_zero = Vec::new();
    for &d in &ctx.cfg.sweep.distances {
        let (cells, snapped) = snap_distance(&ctx.grid, d);
        let v = evolve(&v0.roll([cells, 0]), &params, &solve)?;
        let r = interaction_norm(&u, &v, &params, None, None)?.with_separation(snapped);
        ctx.save(&r, "interaction", "separation", snapped)?;
        ctx.checks.check(r.pieces_bounded(), format!("half-space pieces bounded by the global norm at D = {snapped}"));
        at_zero.push(r.global[0]);
    }
    println!("global norm at t = 0: {at_zero:?}");
    ctx.checks.check(at_zero.windows(2).all(|w| w[1] < w[0]), "initial interaction norm strictly decreasing in D");
    Ok(())
}

fn check_sweep(ctx: &mut Ctx, r: &ConcatReport) {
    for row in &r.rows {
        println!(
            "D = {}: exists {}, valid {}, eps {:.3e}{}",
            row.d,
            row.exists,
            row.valid,
            row.eps,
            row.eps_components.map(|c| format!(" ({:.3e}, {:.3e})", c[0], c[1])).unwrap_or_default()
        );
    }
    if !r.eps_nonincreasing() {
        ctx.checks.note("eps is not monotone in D on this scenario");
    }
    ctx.checks.check(r.minimal_d.is_some(), format!("target {:e}: {}", r.eps_target, r.verdict));
}

fn concat(ctx: &mut Ctx) -> Result<()> {
    let u0 = ctx.datum("initial_u")?;
    let v0 = ctx.datum("initial_v")?;
    let mut w0 = ctx.datum_or_zero("initial_w");
    if let Some(ratio) = ctx.cfg.sweep.w0_scale {
        w0 = scale_perturbation(&w0, &u0, ratio)?;
    }
    let sc = ConcatScenario {
        u0,
        v0,
        w0,
        distances: ctx.cfg.sweep.distances.clone(),
        params: ctx.cfg.nls()?,
        solve: ctx.cfg.solve()?,
        order: ctx.cfg.order()?,
    };
    let r = d_sweep(&sc, ctx.cfg.sweep.eps_target)?;
    ctx.save(&r, "concat", "sweep", sc.solve.horizon)?;
    check_sweep(ctx, &r);
    Ok(())
}

fn coupled(ctx: &mut Ctx) -> Result<()> {
    let pair = |which: &str| -> Result<[Field; 2]> { Ok(ctx.cfg.datum(which)?.build_pair(&ctx.grid)) };
    let w0 = match ctx.cfg.initial_w {
        Some(_) => pair("initial_w")?,
        None => [Field::zeros(&ctx.grid), Field::zeros(&ctx.grid)],
    };
    let sc = CoupledScenario {
        u0: pair("initial_u")?,
        v0: pair("initial_v")?,
        w0,
        distances: ctx.cfg.sweep.distances.clone(),
        params: ctx.cfg.coupled()?,
        solve: ctx.cfg.solve()?,
    };
    let r = coupled_d_sweep(&sc, ctx.cfg.sweep.eps_target)?;
    ctx.save(&r, "coupled", "sweep", sc.solve.horizon)?;
    check_sweep(ctx, &r);
    Ok(())
}

fn lens(ctx: &mut Ctx) -> Result<()> {
    let est = ctx.cfg.estimate()?.clone();
    let u0 = ctx.datum("initial_u")?;
    let r = scattering_localization(&u0, &est.a.build()?, &est.b.build()?, &ctx.cfg.nls()?, &ctx.cfg.solve()?)?;
    ctx.save(&r, "lens", "frequency", r.distance)?;
    if r.terminated_by != Termination::Horizon {
        ctx.checks.note(format!("harmonic run stopped early ({})", r.terminated_by.label()));
    }
    ctx.checks.check(r.margin >= 0.0, format!("scattering localization margin {:.3e} >= 0", r.margin));
    Ok(())
}

fn run_gd(ctx: &mut Ctx, u0: &Field) -> Result<GdProxyResult> {
    let solve = ctx.cfg.solve()?;
    let th = solve.horizon;
    let tail = ctx.cfg.sweep.tail_start.unwrap_or(th / 2.0);
    let t = &ctx.cfg.thresholds;
    let r = gd_proxy(u0, &ctx.cfg.nls()?, &solve, th, tail, t.bound_m, t.tail_eps)?;
    ctx.save(&r, "gdproxy", "horizon", th)?;
    println!(
        "S0 {:.4}, S1 {:.4}, tail {:?}, terminated by {} at {}",
        r.s0,
        r.s1,
        r.tail,
        r.terminated_by.label(),
        r.end_time
    );
    ctx.checks.check(r.verdict == GdVerdict::Bounded, format!("verdict {:?}", r.verdict));
    Ok(r)
}

fn gdproxy(ctx: &mut Ctx) -> Result<()> {
    let u0 = ctx.datum("initial_u")?;
    run_gd(ctx, &u0).map(drop)
}

fn spread(ctx: &mut Ctx) -> Result<()> {
    let bump = ctx.datum("initial_u")?;
    let n = ctx.cfg.sweep.copies.ok_or_else(|| config_error("spread needs [sweep] copies"))?;
    let spacing = ctx.cfg.sweep.spacing.ok_or_else(|| config_error("spread needs [sweep] spacing"))?;
    let (datum, record) = build_spread_data(&bump, n, spacing, ctx.cfg.thresholds.shell_mass_tol)?;
    ctx.save(&record, "spread", "copies", n as f64)?;
    fs::create_dir_all(&ctx.out)?;
    save_snapshot(&ctx.out.join("spread_datum.nlsf"), &datum, 0.0)?;
    ctx.checks.check(record.additive(1e-8), format!("norms scale by sqrt({n}): l2 {}, grad {}", record.l2, record.h1grad));
    run_gd(ctx, &datum).map(drop)
}

fn run(command: Command) -> Result<bool> {
    let (args, action): (RunArgs, fn(&mut Ctx) -> Result<()>) = match command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let diagnostics = cfg.diagnostics();
            for d in &diagnostics {
                println!("{d}");
            }
            if diagnostics.is_empty() {
                return Ok(true);
            }
            return Err(config_error(format!("{} problem(s) in {}", diagnostics.len(), config.display())));
        }
        Command::Simulate(a) => (a, simulate),
        Command::Disturbance(a) => (a, disturbance),
        Command::Virial(a) => (a, virial),
        Command::Interaction(a) => (a, interaction),
        Command::Concat(a) => (a, concat),
        Command::Lens(a) => (a, lens),
        Command::Coupled(a) => (a, coupled),
        Command::Gdproxy(a) => (a, gdproxy),
        Command::Spread(a) => (a, spread),
    };
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("configuring worker threads")?;
    }
    let cfg = load(&args.config)?;
    let grid = cfg.build_grid()?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut ctx = Ctx { cfg, grid, out: args.out, checks: Checks { strict: args.strict, violations: 0 } };
    action(&mut ctx)?;
    Ok(!(ctx.checks.strict && ctx.checks.violations > 0))
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| matches!(c.downcast_ref::<nlslab::Error>(), Some(nlslab::Error::Config(_))))
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
