use proptest::prelude::*;

use psystem::analysis::{decay_integral_sup, fit_decay_exponent, fit_lifespan_scaling, LifespanLaw};
use psystem::characteristics::{riccati_integrate, RiccatiEnd, RiccatiOptions};
use psystem::experiment::{parse_config, ExperimentConfig, ExperimentKind};
use psystem::quadrature::adaptive_simpson;
use psystem::thermo::{pressure, sound_speed, theta_gamma};
use psystem::*;

fn gamma() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.4), Just(2.0), Just(3.0), 1.05f64..4.0]
}

proptest! {
    #[test]
    fn riemann_round_trip(g in gamma(), u in 0.3f64..3.0, v in -1.0f64..1.0) {
        let p = Parameters::new(g, 1.0, 0.5, 0.01).unwrap();
        let rp = to_riemann(GasState { u, v }, &p).unwrap();
        let back = from_riemann(rp, &p).unwrap();
        prop_assert!((back.u - u).abs() <= 1e-12 * u);
        prop_assert!((back.v - v).abs() <= 1e-12);
        prop_assert!(rp.s - rp.r > -2.0 * p.eta_offset());
        prop_assert!(((rp.r + rp.s) / 2.0 - v).abs() <= 1e-15);
    }

    #[test]
    fn sound_speed_squared_is_minus_pressure_slope(g in gamma(), u in 0.3f64..3.0) {
        let p = Parameters::new(g, 1.0, 0.5, 0.01).unwrap();
        let h = 2e-4 * u;
        let pr = |x: f64| pressure(x, &p).unwrap();
        let dp = (pr(u - 2.0 * h) - 8.0 * pr(u - h) + 8.0 * pr(u + h) - pr(u + 2.0 * h)) / (12.0 * h);
        let c = sound_speed(u, &p).unwrap();
        prop_assert!((c * c + dp).abs() <= 1e-10 * (c * c).max(1.0), "{} vs {}", c * c, -dp);
    }

    #[test]
    fn theta_slope_is_root_sound_speed(g in gamma(), u in 0.3f64..3.0) {
        let p = Parameters::new(g, 1.0, 0.5, 0.01).unwrap();
        let h = 1e-5;
        let d = (theta_gamma(u + h, &p).unwrap() - theta_gamma(u - h, &p).unwrap()) / (2.0 * h);
        prop_assert!((d - sound_speed(u, &p).unwrap().sqrt()).abs() <= 1e-6);
    }

    #[test]
    fn damping_weight_ratio_matches_quadrature(
        mu in 0.0f64..3.0, lambda in 0.0f64..4.0, t in 0.0f64..50.0, h in 0.0f64..10.0,
    ) {
        let p = Parameters::new(1.4, lambda, mu, 0.01).unwrap();
        let ratio = damping_weight(t + h, &p) / damping_weight(t, &p);
        let exact = adaptive_simpson(|s| p.damping_rate(s) / 2.0, t, t + h, 1e-13).exp();
        prop_assert!((ratio - exact).abs() <= 1e-10 * exact);
        if mu == 0.0 {
            prop_assert!((ratio - (lambda * h / 2.0).exp()).abs() <= 1e-12 * ratio);
        }
    }

    #[test]
    fn decay_fit_is_exact_on_power_laws(e in -3.0f64..1.0, c in 0.01f64..100.0, lo in 0.0f64..20.0) {
        let hi = 10.0 * (1.0 + lo) + 50.0;
        let series: Vec<(f64, f64)> = (0..30)
            .map(|k| {
                let t = lo + (hi - lo) * k as f64 / 29.0;
                (t, c * (1.0 + t).powf(e))
            })
            .collect();
        let fit = fit_decay_exponent(&series, (lo, hi)).unwrap();
        prop_assert!((fit.exponent - e).abs() <= 1e-10);
        prop_assert!((fit.constant - c).abs() <= 1e-8 * c);
        prop_assert!(fit.residual_rms.is_finite());
        prop_assert!(fit.window.0 >= lo && fit.window.1 <= hi);
    }

    #[test]
    fn lifespan_fit_recovers_exponent(k in -3.0f64..-0.2, c in 0.1f64..10.0) {
        let pairs: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.02, 0.01].iter().map(|&e: &f64| (e, c * e.powf(k))).collect();
        let fit = fit_lifespan_scaling(&pairs, LifespanLaw::Power).unwrap();
        prop_assert!((fit.exponent - k).abs() <= 1e-10);
    }

    #[test]
    fn weighted_integral_sup_is_monotone_in_t_max(
        mu in 0.0f64..1.0, lambda in 0.2f64..4.0, t in 1.0f64..1e4,
    ) {
        let p = Parameters::new(1.4, lambda, mu, 0.01).unwrap();
        // Same log-spaced nodes below t: the finer grid on [0, t²] contains them.
        let (a, _) = decay_integral_sup(&p, t, 201).unwrap();
        let (b, _) = decay_integral_sup(&p, (1.0 + t) * (1.0 + t) - 1.0, 401).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-9), "{a} then {b}");
    }

    #[test]
    fn riccati_sign_dichotomy_on_frozen_background(y0 in -1.0f64..1.0, u in 0.5f64..2.0, g in gamma()) {
        let p = Parameters::new(g, 0.0, 0.0, 0.01).unwrap();
        let coef = p.riccati_coefficient(u);
        let end = riccati_integrate(y0, 0.0, 200.0, |_| (u, 0.0), &p, &RiccatiOptions::default());
        if y0 >= 0.0 {
            prop_assert!(matches!(end, RiccatiEnd::Finished(_)));
        } else {
            let exact = -1.0 / (y0 * coef);
            if exact < 190.0 {
                match end {
                    RiccatiEnd::BlowUp(t) => prop_assert!((t - exact).abs() <= 5e-3 * exact, "{t} vs {exact}"),
                    other => prop_assert!(false, "{other:?}, expected blow-up near {exact}"),
                }
            }
        }
    }

    #[test]
    fn config_echo_round_trips(
        g in 1.01f64..5.0, mu in 0.0f64..3.0, lambda in 0.0f64..5.0, eps in 0.0f64..0.5,
        n in 16usize..5000, horizon in 0.1f64..1e5, cfl in 0.05f64..0.9, workers in 1usize..16,
        kind in prop_oneof![Just("run"), Just("lifespan_sweep"), Just("threshold_map")],
        eps_list in proptest::collection::vec(0.001f64..0.5, 1..6),
    ) {
        let list = eps_list.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        let text = format!(
            "kind={kind} gamma={g} mu={mu} lambda={lambda} epsilon={eps} n_cells={n} horizon={horizon} cfl={cfl} workers={workers} epsilons={list}"
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
    }
}

#[test]
fn theta_branch_is_continuous_at_gamma_three() {
    for u in [0.5f64, 2.0] {
        for g in [3.0 - 1e-6, 3.0 + 1e-6] {
            let p = Parameters::new(g, 0.0, 0.0, 0.0).unwrap();
            let th = theta_gamma(u, &p).unwrap();
            assert!((th - u.ln()).abs() <= 1e-4, "gamma {g} u {u}: {th}");
        }
    }
}

#[test]
fn default_config_kind_is_run() {
    assert_eq!(ExperimentConfig::default().kind, ExperimentKind::Run);
}
