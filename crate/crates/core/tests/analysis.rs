use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iandi::analysis::*;
use iandi::odesim::{AdaptiveOptions, Integrator};
use iandi::plants::*;

fn rk4(dt: f64) -> Integrator {
    Integrator::Fixed { dt }
}

fn z_rate(b: &iandi::IandIBundle, x0: &[f64], t1: f64, dt: f64) -> f64 {
    let tr = simulate(b, x0, 0.0, t1, &rk4(dt)).unwrap();
    fit_decay(&off_manifold_trajectory(b, &tr)).unwrap().rate
}

#[test]
fn decay_rates_match_design() {
    let iwp = make_iwp(presets::iwp_paper()).unwrap();
    let rate = z_rate(&iwp, &[3.0 * PI / 4.0, PI / 3.0, 0.0, 0.0], 40.0, 1e-2);
    // a double pole fitted by a single exponential comes out slightly slow
    assert!(rate < -0.85 && rate > -1.05, "{rate}");

    let nl = make_cartpend_nonlinear(presets::cartpend_nl_paper()).unwrap();
    let rate = z_rate(&nl, &[0.5, 0.0, 0.2, 0.0], 60.0, 1e-3);
    assert!((rate + 0.5).abs() < 0.05 * 0.5, "{rate}");

    let p = presets::dcac_default();
    let dc = make_dcac(p).unwrap();
    let rate = z_rate(&dc, &[0.0, 120.0, 40.0, 14.0], 0.02, 1e-6);
    assert!((rate + p.gamma * p.e / p.l).abs() < 0.05 * 1000.0, "{rate}");
}

#[test]
fn lti_converges_onto_nearby_orbit() {
    let b = make_lti(LtiParams::default()).unwrap();
    let mut x0: Vec<f64> = b.immersion.pi(&[1.0, 0.0]).iter().copied().collect();
    x0[2] += 0.1;
    x0[3] += 0.1;
    let tr = simulate(&b, &x0, 0.0, 30.0, &rk4(1e-3)).unwrap();
    let orbit = limit_orbit(&b, &tr, DEFAULT_SAMPLES_PER_PERIOD).unwrap();
    assert!((orbit.period - 2.0 * PI).abs() < 1e-6);
    let d = orbital_distance(&tr, &orbit, 30.0);
    assert!(d <= 1e-4, "{d}");
    assert!(orbital_distance(&tr, &orbit, 0.0) > 1e-2);
}

#[test]
fn iwp_settles_on_target_orbit() {
    let b = make_iwp(presets::iwp_paper()).unwrap();
    let tr = simulate(&b, &[3.0 * PI / 4.0, PI / 3.0, 0.0, 0.0], 0.0, 200.0, &rk4(1e-2)).unwrap();
    let orbit = limit_orbit(&b, &tr, DEFAULT_SAMPLES_PER_PERIOD).unwrap();
    assert!(tail_orbital_distance(&tr, &orbit, 0.1, 10) < 1e-3);
    assert!(energy_drift(&b, &tr).unwrap() < 1e-6);
    let period = oscillation_period(&b, &tr).unwrap();
    assert!((period - orbit.period).abs() < 1e-2 * orbit.period);
}

#[test]
fn iwp_period_shrinks_as_gain_grows() {
    let mut periods = vec![];
    for k in presets::IWP_K_SWEEP {
        let p = IwpParams { k, ..presets::iwp_paper() };
        let b = make_iwp(p).unwrap();
        let tr = simulate(&b, &[3.0 * PI / 4.0, PI / 3.0, 0.0, 0.0], 0.0, 150.0, &rk4(1e-2)).unwrap();
        periods.push((p.a(), oscillation_period(&b, &tr).unwrap()));
    }
    periods.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in periods.windows(2) {
        assert!(w[1].1 < w[0].1, "{periods:?}");
    }
}

#[test]
fn cartpend_linear_stays_in_cone() {
    let p = presets::cartpend_lin_paper();
    let b = make_cartpend_linear(p).unwrap();
    let tr = simulate(&b, &[0.5, 0.0, 0.0, 0.0], 0.0, 30.0, &rk4(1e-3)).unwrap();
    let margin = tr
        .states()
        .map(|x| cartpend_singularity_margin(&b, x).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(margin > 0.0);
    let (amp, _) = tail_amplitude(&b, &tr, TAIL_FRACTION);
    assert!(amp < p.beta_star());
    let iwp = make_iwp(presets::iwp_paper()).unwrap();
    assert!(cartpend_singularity_margin(&iwp, &[0.0; 4]).is_err());
}

#[test]
fn adaptive_run_gives_same_metrics() {
    let b = make_cartpend_nonlinear(presets::cartpend_nl_paper()).unwrap();
    let x0 = [0.5, 0.0, 0.2, 0.0];
    let a = simulate(&b, &x0, 0.0, 30.0, &rk4(1e-3)).unwrap();
    let c = simulate(&b, &x0, 0.0, 30.0, &Integrator::Adaptive(AdaptiveOptions::new(1e-10, 1e-12))).unwrap();
    let pa = oscillation_period(&b, &a).unwrap();
    let pc = oscillation_period(&b, &c).unwrap();
    assert!((pa - pc).abs() < 1e-4 * pa);
}

#[test]
fn lemma1_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let a = rng.random_range(0.05..2.0);
        let l1 = rng.random_range(0.0..1.0);
        let l2 = rng.random_range(0.2..3.0);
        let x0 = (rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
        let rep = lemma1_check(a, l1, l2, x0, 10.0 / l2 + 20.0).unwrap();
        assert!(rep.bound_holds, "case {case}: {rep:?}");
        let w = rng.random_range(0.5..5.0);
        let eps = move |t: f64| l1 * (-l2 * t).exp() * (w * t).cos();
        let rep = lemma1_check_signal(a, l1, l2, x0, 10.0 / l2 + 20.0, &eps).unwrap();
        assert!(rep.bound_holds, "case {case} oscillating: {rep:?}");
    }
}

#[test]
fn lemma2_reference_values() {
    let s = Lemma2Setup::new(-4.0, 9.8, 1.0, 0.1, [0.3, 0.0]).unwrap();
    let r0 = lemma2_r0(&s).unwrap();
    assert!(s.f(r0).abs() < 1e-10);
    let l2 = lemma2_l2min(&s).unwrap();
    assert!(l2 > 0.0 && l2.is_finite());
    assert!(lemma2_check(&s, 1.5 * l2, 20.0).unwrap().stayed_in_cone);
}

#[test]
fn lemma2_root_exists_only_for_strong_gains() {
    let near = Lemma2Setup::new(-1.5, 9.8, 1.0, 0.1, [0.0, 0.0]).unwrap();
    assert!(matches!(lemma2_r0(&near), Err(AnalysisError::NoRoot(_))));
    for k in [-2.0, -4.0, -8.0] {
        let s = Lemma2Setup::new(k, 9.8, 1.0, 0.1, [0.0, 0.0]).unwrap();
        let r0 = lemma2_r0(&s).unwrap();
        assert!(s.f(r0).abs() < 1e-9, "k = {k}");
        assert!(s.f(r0 + 1.0) > 0.0);
    }
}

#[test]
fn analysis_errors_are_typed() {
    let b = make_lti(LtiParams::default()).unwrap();
    let tr = simulate(&b, &[0.0; 4], 0.0, 1.0, &rk4(0.1)).unwrap();
    assert!(oscillation_period(&b, &tr).is_none());
    assert!(matches!(
        fit_decay(&off_manifold_trajectory(&b, &tr)),
        Err(AnalysisError::TooFewSamples { .. })
    ));
    let dc = make_dcac(presets::dcac_default()).unwrap();
    assert!(matches!(energy_drift(&dc, &tr), Err(AnalysisError::NoFirstIntegral)));
    assert!(matches!(orbit_samples(&b, &[1.0, 0.0], 4), Err(AnalysisError::InvalidSetup(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrapped_angles_land_in_half_open_interval(x in -1e3f64..1e3) {
        let y = wrap_angle(x);
        prop_assert!(y > -PI && y <= PI);
        let turns = (x - y) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn orbit_samples_lie_on_orbit(shift in 0usize..2048, theta in 0.0f64..(2.0 * PI), r in 0.2f64..1.5) {
        let b = make_lti(LtiParams::default()).unwrap();
        let orbit = orbit_samples(&b, &[r * theta.cos(), r * theta.sin()], 256).unwrap();
        let x = orbit.samples[shift % orbit.samples.len()].clone();
        prop_assert!(distance_to_orbit(&orbit, &x) < 1e-12);
        let rotated = orbit.rotated(shift);
        prop_assert!((distance_to_orbit(&rotated, &[0.3, 0.1, 0.2, 0.0]) - distance_to_orbit(&orbit, &[0.3, 0.1, 0.2, 0.0])).abs() < 1e-9);
    }

    #[test]
    fn energy_bound_dominates_start(a in 0.01f64..5.0, l1 in 0.0f64..2.0, l2 in 0.01f64..10.0, x1 in -3.0f64..3.0, x3 in -3.0f64..3.0) {
        let bound = lemma1_bound(a, l1, l2, (x1, x3));
        prop_assert!(bound >= 0.5 * x3 * x3 - a * x1.cos() - 1e-12);
    }

    #[test]
    fn bundles_have_small_residuals_anywhere(seed in any::<u64>()) {
        let b = make_cartpend_nonlinear(presets::cartpend_nl_paper()).unwrap();
        let rep = iandi::design::validate_bundle(&b, 20, seed);
        prop_assert!(rep.passes());
    }
}
