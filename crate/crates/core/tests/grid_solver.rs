use std::f64::consts::PI;

use psystem::analysis::{check_lemma_esp, measure_lifespan, threshold_map, Lifespan, SweepSetup};
use psystem::*;

fn periodic(n: usize) -> Grid {
    Grid::periodic(0.0, 2.0 * PI, n).unwrap()
}

#[test]
fn sine_init_matches_closed_form_eta_for_gamma_three() {
    let p = Parameters::new(3.0, 0.0, 0.0, 0.01).unwrap();
    let grid = periodic(64);
    let f = init(&InitialData::sine(2.0), &grid, &p).unwrap();
    for (i, x) in grid.centers().into_iter().enumerate() {
        let eta = (f.s[i] - f.r[i]) / 2.0 + p.eta_offset();
        assert!((eta - 1.0 / (1.0 + 0.01 * (2.0 * x).sin())).abs() <= 1e-12);
        assert!((f.r[i] + f.s[i]).abs() <= 1e-15);
    }
}

#[test]
fn zero_amplitude_is_fixed() {
    let p = Parameters::new(1.4, 1.0, 0.5, 0.0).unwrap();
    let grid = periodic(32);
    let f = init(&InitialData::sine(1.0), &grid, &p).unwrap();
    assert!(f.r.iter().chain(&f.s).chain(&f.rx).chain(&f.sx).all(|&q| q == 0.0));
    let out = run(&InitialData::sine(1.0), &grid, &p, 50.0, &SnapshotPolicy::default(), &SolverOptions::default()).unwrap();
    assert_eq!(out.status, Status::GlobalToHorizon(50.0));
    assert!(out.series.iter().all(|s| s.sup_r == 0.0 && s.gradient() == 0.0));
    assert_eq!(check_lemma_esp(&out), Ok(true));
}

#[test]
fn simple_wave_keeps_plus_invariant_zero_until_blow_up() {
    let p = Parameters::new(3.0, 0.0, 0.0, 0.05).unwrap();
    let grid = periodic(256);
    let f = init(&InitialData::simple_wave(1.0), &grid, &p).unwrap();
    assert!(f.s.iter().chain(&f.sx).all(|&q| q == 0.0));
    let out = run(&InitialData::simple_wave(1.0), &grid, &p, 100.0, &SnapshotPolicy::default(), &SolverOptions::default()).unwrap();
    assert!(matches!(out.status, Status::BlowUp(_)));
    let worst = out.series.iter().map(|s| s.sup_s).fold(0.0f64, f64::max);
    assert!(worst <= 1e-10, "sup |s| reached {worst}");
}

#[test]
fn initial_compatibility_residual_is_second_order() {
    let p = Parameters::new(1.4, 1.0, 0.5, 0.01).unwrap();
    let res = |n| init(&InitialData::sine(1.0), &periodic(n), &p).unwrap().compatibility_residual(&periodic(n));
    let ratio = res(128) / res(256);
    assert!(ratio >= 3.5, "ratio {ratio}");
}

#[test]
fn global_run_in_decay_region_has_increasing_series() {
    let p = Parameters::new(1.4, 1.0, 0.5, 0.01).unwrap();
    let out = run(&InitialData::sine(1.0), &periodic(128), &p, 1e3, &SnapshotPolicy::default(), &SolverOptions::default()).unwrap();
    assert_eq!(out.status, Status::GlobalToHorizon(1e3));
    assert!(out.series.windows(2).all(|w| w[0].t < w[1].t));
    assert_eq!(check_lemma_esp(&out), Ok(true));
}

#[test]
fn undamped_run_respects_sup_norm_bound_through_blow_up() {
    let p = Parameters::new(1.4, 0.0, 0.0, 0.01).unwrap();
    let out = run(&InitialData::sine(1.0), &periodic(256), &p, 1e3, &SnapshotPolicy::default(), &SolverOptions::default()).unwrap();
    let t = measure_lifespan(&out).time().expect("blow-up");
    assert!(t <= out.horizon);
    assert!(out.series.last().unwrap().t <= t);
    assert_eq!(check_lemma_esp(&out), Ok(true));
}

#[test]
fn raising_the_threshold_never_shortens_the_lifespan() {
    let p = Parameters::new(3.0, 0.0, 0.0, 0.05).unwrap();
    let grid = periodic(256);
    let mut last = 0.0;
    for factor in [1e1, 1e2, 1e3, 1e4, 1e5] {
        let options = SolverOptions {
            blowup_factor: factor,
            bracket_factors: vec![],
            ..Default::default()
        };
        let out = run(&InitialData::simple_wave(1.0), &grid, &p, 100.0, &SnapshotPolicy::default(), &options).unwrap();
        let t = measure_lifespan(&out).time().unwrap();
        assert!(t >= last, "factor {factor}: {t} < {last}");
        last = t;
    }
}

#[test]
fn bracket_crossing_precedes_blow_up() {
    let p = Parameters::new(3.0, 0.0, 0.0, 0.05).unwrap();
    let out = run(&InitialData::simple_wave(1.0), &periodic(256), &p, 100.0, &SnapshotPolicy::default(), &SolverOptions::default()).unwrap();
    let (early, t_star) = psystem::analysis::lifespan_bracket(&out).unwrap();
    assert!(early <= t_star && early > 0.9 * t_star, "{early} {t_star}");
}

#[test]
fn oversized_perturbation_is_vacuum() {
    let p = Parameters::new(1.4, 1.0, 0.5, 0.95).unwrap();
    let out = run(&InitialData::sine(1.0), &periodic(64), &p, 10.0, &SnapshotPolicy::default(), &SolverOptions::default()).unwrap();
    assert_eq!(out.status, Status::Vacuum(0.0));
    assert!(matches!(measure_lifespan(&out), Lifespan::Failed(Status::Vacuum(_))));
}

#[test]
fn tiny_steps_are_a_cfl_failure() {
    let p = Parameters::new(1.4, 1.0, 0.5, 0.01).unwrap();
    let options = SolverOptions {
        dt_min: 1.0,
        ..Default::default()
    };
    let out = run(&InitialData::sine(1.0), &periodic(64), &p, 10.0, &SnapshotPolicy::default(), &options).unwrap();
    assert!(matches!(out.status, Status::CflFailure(_)));
}

#[test]
fn threshold_map_examples() {
    let k = 8.0;
    let setup = SweepSetup {
        grid: Grid::periodic(0.0, 2.0 * PI / k, 128).unwrap(),
        data: InitialData::sine(k),
        horizon: 1e3,
        options: SolverOptions::default(),
        policy: SnapshotPolicy::default(),
        workers: 1,
    };
    let at = |mu: f64, lambda: f64, eps: f64| {
        let base = Parameters::new(1.4, lambda, mu, eps).unwrap();
        threshold_map(&[mu], &[lambda], &base, &setup).unwrap().cells[0].status
    };
    assert!(matches!(at(0.5, 1.0, 0.01), Status::GlobalToHorizon(_)));
    assert!(matches!(at(2.0, 1.0, 0.05), Status::BlowUp(t) if t < 1e3));
    assert!(matches!(at(1.0, 3.0, 0.01), Status::GlobalToHorizon(_)));
}

#[test]
fn sweep_results_do_not_depend_on_worker_count() {
    let setup = |workers| SweepSetup {
        grid: periodic(64),
        data: InitialData::sine(1.0),
        horizon: 300.0,
        options: SolverOptions::default(),
        policy: SnapshotPolicy::default(),
        workers,
    };
    let base = Parameters::new(1.4, 1.0, 2.0, 0.05).unwrap();
    let eps = [0.1, 0.07, 0.05, 0.03];
    let one = psystem::analysis::lifespan_sweep(&base, &eps, &setup(1)).unwrap();
    let three = psystem::analysis::lifespan_sweep(&base, &eps, &setup(3)).unwrap();
    assert_eq!(one, three);
}
