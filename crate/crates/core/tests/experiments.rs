use nlslab::dynamics::{evolve, CoupledParams, NlsParams, SolveConfig, Termination};
use nlslab::error::Error;
use nlslab::experiments::*;
use nlslab::report::CsvReport;
use nlslab::spectral::{l2_norm, make_grid, norm_lp, Field, Grid};
use num_complex::Complex64;

fn gaussian(g: &Grid, amp: f64, center: f64) -> Field {
    Field::from_real_fn(g, |p| amp * (-(p[0] - center).powi(2) - p[1] * p[1]).exp())
}

fn bump(g: &Grid, center: f64, radius: f64) -> Field {
    Field::from_real_fn(g, |p| {
        let r2 = ((p[0] - center).powi(2) + p[1] * p[1]) / (radius * radius);
        if r2 < 1.0 {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

fn scenario(g: &Grid, u0: Field, v0: Field, params: NlsParams, distances: Vec<f64>, t: f64) -> ConcatScenario {
    ConcatScenario {
        w0: Field::zeros(g),
        u0,
        v0,
        distances,
        params,
        solve: SolveConfig::new(0.01, t).unwrap().with_stride(5).unwrap(),
        order: StrichartzOrder::Zero,
    }
}

#[test]
fn strichartz_of_zero_trajectory() {
    let g = make_grid(1, 20.0, 256).unwrap();
    let tr = evolve(&Field::zeros(&g), &NlsParams::new(1.0, 4.0).unwrap(), &SolveConfig::new(0.1, 1.0).unwrap()).unwrap();
    for order in [StrichartzOrder::Zero, StrichartzOrder::One, StrichartzOrder::Fractional(0.5)] {
        assert_eq!(discrete_strichartz_norm(&tr, order, None).unwrap(), 0.0);
    }
}

#[test]
fn strichartz_of_single_mode() {
    // e^{ix} on [-π, π) only rotates its phase, so every norm is constant in time
    let g = make_grid(1, std::f64::consts::PI, 64).unwrap();
    let u0 = Field::from_fn(&g, |p| Complex64::from_polar(1.0, p[0]));
    let cfg = SolveConfig::new(0.01, 1.0).unwrap().with_shell_tol(1.0).unwrap();
    let tr = evolve(&u0, &NlsParams::linear(), &cfg).unwrap();
    assert_eq!(tr.terminated_by, Termination::Horizon);
    let sigma = 4.0;
    let expected = l2_norm(&u0) + norm_lp(&u0, sigma + 2.0, None).unwrap();
    let got = strichartz_of_fields(&tr.times, &tr.snapshots, sigma, StrichartzOrder::Zero, Some((0.0, 1.0))).unwrap();
    assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
    assert!(matches!(
        discrete_strichartz_norm(&tr, StrichartzOrder::Zero, Some((2.0, 3.0))),
        Err(Error::EmptyWindow(..))
    ));
}

#[test]
fn strichartz_quadrature_self_converges() {
    let g = make_grid(1, 40.0, 1024).unwrap();
    let u0 = gaussian(&g, 1.0, 0.0);
    let sigma = 4.0;
    let proxy = |dt: f64, order| {
        let tr = evolve(&u0, &NlsParams::linear(), &SolveConfig::new(dt, 1.0).unwrap()).unwrap();
        strichartz_of_fields(&tr.times, &tr.snapshots, sigma, order, Some((0.0, 1.0))).unwrap()
    };
    for order in [StrichartzOrder::Zero, StrichartzOrder::One] {
        let (coarse, fine) = (proxy(0.01, order), proxy(0.001, order));
        assert!((coarse - fine).abs() < 1e-4, "{order:?}: {coarse} vs {fine}");
    }
}

#[test]
fn fractional_order_interpolates() {
    let g = make_grid(1, 20.0, 512).unwrap();
    let tr = evolve(&gaussian(&g, 1.0, 0.0), &NlsParams::new(-1.0, 4.0).unwrap(), &SolveConfig::new(0.01, 0.5).unwrap())
        .unwrap();
    let s0 = discrete_strichartz_norm(&tr, StrichartzOrder::Zero, None).unwrap();
    let s1 = discrete_strichartz_norm(&tr, StrichartzOrder::One, None).unwrap();
    let sh = discrete_strichartz_norm(&tr, StrichartzOrder::Fractional(0.5), None).unwrap();
    assert!(s0 < s1);
    assert!((sh - (s0 * s1).sqrt()).abs() < 1e-12 * sh);
}

#[test]
fn concat_against_zero_partner_vanishes() {
    let g = make_grid(1, 64.0, 1024).unwrap();
    for params in [NlsParams::new(-1.0, 4.0).unwrap(), NlsParams::new(1.0, 2.0).unwrap(), NlsParams::linear()] {
        let sc = scenario(&g, gaussian(&g, 0.8, 0.0), Field::zeros(&g), params, vec![5.0, 10.0], 1.0);
        let report = d_sweep(&sc, 1e-2).unwrap();
        for row in &report.rows {
            assert!(row.eps <= 1e-10, "{params:?} D = {}: {}", row.d, row.eps);
            assert!(row.valid && row.exists);
        }
        assert_eq!(report.minimal_d, Some(report.rows[0].d));
    }
}

#[test]
fn translation_commutes_with_flow() {
    let g = make_grid(1, 64.0, 1024).unwrap();
    let v0 = gaussian(&g, 0.8, 0.0);
    let params = NlsParams::new(-1.0, 4.0).unwrap();
    let cfg = SolveConfig::new(0.01, 2.0).unwrap().with_stride(200).unwrap();
    let (cells, d) = snap_distance(&g, 10.0);
    assert!((d - 10.0).abs() < 1e-12);
    let moved = evolve(&v0.roll([cells, 0]), &params, &cfg).unwrap();
    let centered = evolve(&v0, &params, &cfg).unwrap();
    let err = moved.final_field().max_abs_diff(&centered.final_field().roll([cells, 0]));
    assert!(err <= 1e-12, "{err}");
}

#[test]
fn infinite_target_picks_first_existing_distance() {
    let g = make_grid(1, 64.0, 1024).unwrap();
    let u0 = gaussian(&g, 0.8, 0.0);
    let sc = scenario(&g, u0.clone(), u0, NlsParams::new(-1.0, 4.0).unwrap(), vec![2.0, 5.0, 10.0], 1.0);
    let report = d_sweep(&sc, f64::INFINITY).unwrap();
    assert!(report.all_reach_horizon());
    assert_eq!(report.minimal_d, Some(report.rows[0].d));
    assert!(report.rows[0].eps > report.rows[2].eps);

    let none = d_sweep(&sc, 0.0).unwrap();
    assert_eq!(none.minimal_d, None);
    assert_eq!(none.verdict, NOT_REACHED);

    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with(
        "d,exists,valid,terminated_by,end_time,eps,eps_s,order,eps_first,eps_second,eps_target,minimal_d,verdict\n"
    ));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn single_run_matches_sweep_row() {
    let g = make_grid(1, 64.0, 1024).unwrap();
    let u0 = gaussian(&g, 0.8, 0.0);
    let mut sc = scenario(&g, u0.clone(), u0, NlsParams::new(-1.0, 4.0).unwrap(), vec![5.0, 10.0], 1.0);
    sc.order = StrichartzOrder::One;
    let row = concat_run(&sc, 10.0).unwrap();
    let sweep = d_sweep(&sc, 1e-2).unwrap();
    assert_eq!(row, sweep.rows[1]);
    assert!(row.eps_s.unwrap() > row.eps);
}

#[test]
fn concat_rejects_bad_scenarios() {
    let g = make_grid(1, 32.0, 512).unwrap();
    let u0 = gaussian(&g, 0.8, 0.0);
    let params = NlsParams::new(-1.0, 4.0).unwrap();
    let decreasing = scenario(&g, u0.clone(), u0.clone(), params, vec![10.0, 5.0], 1.0);
    assert!(matches!(d_sweep(&decreasing, 1e-2), Err(Error::InvalidParameter(_))));
    let too_far = scenario(&g, u0.clone(), u0, params, vec![5.0, 30.0], 1.0);
    assert!(matches!(d_sweep(&too_far, 1e-2), Err(Error::InvalidParameter(_))));
}

#[test]
fn perturbation_scale() {
    let g = make_grid(1, 32.0, 512).unwrap();
    let u0 = gaussian(&g, 0.8, 0.0);
    let w0 = scale_perturbation(&bump(&g, 3.0, 1.0), &u0, 1e-3).unwrap();
    let ratio = nlslab::spectral::norm_hs(&w0, 1.0).unwrap() / nlslab::spectral::norm_hs(&u0, 1.0).unwrap();
    assert!((ratio - 1e-3).abs() < 1e-15);
    assert_eq!(scale_perturbation(&Field::zeros(&g), &u0, 1e-3).unwrap(), Field::zeros(&g));
}

fn coupled(g: &Grid, u0: [Field; 2], v0: [Field; 2], params: CoupledParams, distances: Vec<f64>) -> CoupledScenario {
    CoupledScenario {
        u0,
        v0,
        w0: [Field::zeros(g), Field::zeros(g)],
        distances,
        params,
        solve: SolveConfig::new(0.01, 1.0).unwrap().with_stride(5).unwrap(),
    }
}

#[test]
fn decoupled_system_matches_single_equations() {
    let g = make_grid(1, 64.0, 1024).unwrap();
    let (a, b) = (gaussian(&g, 0.8, 0.0), gaussian(&g, 0.6, 0.5));
    let (c, e) = (gaussian(&g, 0.7, -0.5), gaussian(&g, 0.9, 0.0));
    let cp = CoupledParams::new(-1.0, 0.0, 1.0, 2.0).unwrap();
    let distances = vec![3.0, 6.0];
    let sys = coupled_d_sweep(&coupled(&g, [a.clone(), b.clone()], [c.clone(), e.clone()], cp, distances.clone()), 1e-2)
        .unwrap();
    let first = d_sweep(&scenario(&g, a, c, cp.first_component(), distances.clone(), 1.0), 1e-2).unwrap();
    let second = d_sweep(&scenario(&g, b, e, cp.second_component(), distances, 1.0), 1e-2).unwrap();
    for i in 0..2 {
        let [e1, e2] = sys.rows[i].eps_components.unwrap();
        assert!((e1 - first.rows[i].eps).abs() <= 1e-10, "{e1} vs {}", first.rows[i].eps);
        assert!((e2 - second.rows[i].eps).abs() <= 1e-10, "{e2} vs {}", second.rows[i].eps);
        assert_eq!(sys.rows[i].eps, e1.max(e2));
    }
}

#[test]
fn coupled_against_zero_partner_vanishes() {
    let g = make_grid(1, 64.0, 1024).unwrap();
    let cp = CoupledParams::new(-1.0, 2.0, -1.0, 2.0).unwrap();
    let sc = coupled(&g, [gaussian(&g, 0.8, 0.0), gaussian(&g, 0.5, 0.0)], [Field::zeros(&g), Field::zeros(&g)], cp, vec![5.0]);
    let row = coupled_concat_run(&sc, 5.0).unwrap();
    assert!(row.exists && row.valid);
    assert!(row.eps <= 1e-10, "{}", row.eps);
}

#[test]
fn gd_proxy_of_zero_is_bounded() {
    let g = make_grid(1, 20.0, 256).unwrap();
    let r = gd_proxy(&Field::zeros(&g), &NlsParams::new(-1.0, 4.0).unwrap(), &SolveConfig::new(0.1, 1.0).unwrap(), 2.0, 1.0, 1.0, 1e-3)
        .unwrap();
    assert_eq!(r.verdict, GdVerdict::Bounded);
    assert_eq!((r.s0, r.s1, r.tail), (0.0, 0.0, Some(0.0)));
    assert!(gd_proxy(&Field::zeros(&g), &NlsParams::linear(), &SolveConfig::new(0.1, 1.0).unwrap(), 1.0, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn gd_proxy_flags_focusing_blowup() {
    let g = make_grid(1, 8.0, 2048).unwrap();
    let u0 = gaussian(&g, 3.0, 0.0);
    let cfg = SolveConfig::new(1e-5, 0.1).unwrap().with_stride(100).unwrap();
    let r = gd_proxy(&u0, &NlsParams::new(1.0, 4.0).unwrap(), &cfg, 0.1, 0.05, f64::INFINITY, f64::INFINITY).unwrap();
    assert_eq!(r.terminated_by, Termination::BlowupDetected);
    assert_eq!(r.verdict, GdVerdict::Undetermined);
    assert!(r.end_time < 0.07);
    assert_eq!(r.tail, None);
}

#[test]
fn spread_data_adds_norms() {
    let g = make_grid(1, 64.0, 4096).unwrap();
    let b = bump(&g, 0.0, 1.0);
    let (one, rec1) = build_spread_data(&b, 1, 4.0, 1e-8).unwrap();
    assert_eq!(one, b);
    assert!(rec1.additive(1e-14));
    let (four, rec4) = build_spread_data(&b, 4, 4.0, 1e-8).unwrap();
    assert!(rec4.additive(1e-8), "{rec4:?}");
    assert!(((rec4.l2 / rec4.bump_l2).powi(2) - 4.0).abs() <= 4.0 * 1e-12);
    assert_eq!(rec4.overlap, 0.0);
    assert!((l2_norm(&four) - 2.0 * l2_norm(&b)).abs() < 1e-12);

    assert!(matches!(build_spread_data(&b, 4, 1.5, 1e-8), Err(Error::InvalidParameter(_))));
    assert!(matches!(build_spread_data(&b, 40, 4.0, 1e-8), Err(Error::InvalidParameter(_))));

    let mut buf = Vec::new();
    rec4.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("n,spacing,l2,h1grad,bump_l2,bump_h1grad,overlap\n"));
}
