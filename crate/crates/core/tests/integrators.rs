use std::f64::consts::PI;

use iandi::analysis::{oscillation_section, simulate};
use iandi::odesim::*;
use iandi::plants::presets;

fn rotation() -> FnField<impl Fn(&[f64], &mut [f64]) + Send + Sync> {
    FnField::new(2, |x: &[f64], dx: &mut [f64]| {
        dx[0] = x[1];
        dx[1] = -x[0];
    })
}

fn pendulum(a: f64) -> FnField<impl Fn(&[f64], &mut [f64]) + Send + Sync> {
    FnField::new(2, move |x: &[f64], dx: &mut [f64]| {
        dx[0] = x[1];
        dx[1] = -a * x[0].sin();
    })
}

#[test]
fn fixed_grid_is_uniform() {
    let tr = integrate_fixed(&rotation(), &[1.0, 0.0], 0.5, 1.5, 0.1).unwrap();
    assert_eq!(tr.len(), 11);
    for i in 0..tr.len() {
        assert!((tr.time(i) - (0.5 + 0.1 * i as f64)).abs() < 1e-12);
    }
}

#[test]
fn rk4_rotation_after_one_turn() {
    let tr = integrate_fixed(&rotation(), &[1.0, 0.0], 0.0, 2.0 * PI, 1e-3).unwrap();
    let x = tr.last_state().unwrap();
    assert!((x[0] - 1.0).abs() < 1e-10 && x[1].abs() < 1e-10);
}

#[test]
fn rk4_is_fourth_order() {
    let end = |dt: f64| {
        let tr = integrate_fixed(&pendulum(1.0), &[1.0, 0.0], 0.0, 5.0, dt).unwrap();
        tr.last_state().unwrap().to_vec()
    };
    let reference = integrate_adaptive(&pendulum(1.0), &[1.0, 0.0], 0.0, 5.0, &AdaptiveOptions::new(1e-13, 1e-13))
        .unwrap()
        .last_state()
        .unwrap()
        .to_vec();
    let err = |x: Vec<f64>| ((x[0] - reference[0]).powi(2) + (x[1] - reference[1]).powi(2)).sqrt();
    let ratio = err(end(0.1)) / err(end(0.05));
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn adaptive_matches_fixed_on_every_preset() {
    for name in presets::NAMES {
        let b = presets::lookup(name).unwrap().build().unwrap();
        let x0: Vec<f64> = b.x_sample_box.upper.iter().map(|u| 0.1 * u).collect();
        let t1 = 0.5 * b.meta.nominal_period;
        let dt = b.meta.nominal_dt.min(1e-4);
        let fixed = simulate(&b, &x0, 0.0, t1, &Integrator::Fixed { dt }).unwrap();
        let adaptive = simulate(&b, &x0, 0.0, t1, &Integrator::Adaptive(AdaptiveOptions::new(1e-10, 1e-12))).unwrap();
        let (xf, xa) = (fixed.last_state().unwrap(), adaptive.last_state().unwrap());
        let scale = 1.0 + xf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..xf.len() {
            assert!((xf[i] - xa[i]).abs() <= 1e-6 * scale, "{name}: {xf:?} vs {xa:?}");
        }
    }
}

#[test]
fn events_on_sine() {
    let mut tr = Trajectory::new(1);
    for i in 0..=10_000 {
        let t = i as f64 * 1e-3;
        tr.push(t, &[(2.0 * PI * t).sin()]);
    }
    let ev = detect_crossings(&tr, |x: &[f64]| x[0], default_min_separation(&tr));
    assert!(ev.len() >= 19);
    for e in &ev {
        let half = (e.time * 2.0).round() / 2.0;
        assert!((e.time - half).abs() < 1e-6, "{}", e.time);
    }
    let period = estimate_period(&tr, |x: &[f64]| x[0], default_min_separation(&tr)).unwrap();
    assert!((period - 1.0).abs() < 1e-6);
}

#[test]
fn events_need_two_crossings() {
    let mut tr = Trajectory::new(1);
    for i in 0..100 {
        tr.push(i as f64, &[i as f64 - 50.5]);
    }
    assert_eq!(detect_crossings(&tr, |x: &[f64]| x[0], 0.0).len(), 1);
    assert!(estimate_period(&tr, |x: &[f64]| x[0], 0.0).is_none());
}

#[test]
fn small_swing_pendulum_period() {
    let a = 0.1308;
    let tr = integrate_fixed(&pendulum(a), &[0.05, 0.0], 0.0, 200.0, 1e-2).unwrap();
    let period = estimate_period(&tr, |x: &[f64]| x[0], default_min_separation(&tr)).unwrap();
    let linear = 2.0 * PI / a.sqrt();
    assert!((period - linear).abs() < 0.005 * linear, "{period} vs {linear}");
    assert!((period - 17.37).abs() < 0.005 * 17.37);
}

#[test]
fn section_handles_angle_wrap() {
    let b = presets::lookup(presets::IWP_PAPER).unwrap().build().unwrap();
    let s = oscillation_section(&b);
    assert!(s(&[0.1, 0.0, 0.0, 0.0]) > 0.0);
    assert!(s(&[0.1 + 2.0 * PI, 0.0, 0.0, 0.0]) > 0.0);
    assert!(s(&[-0.1, 0.0, 0.0, 0.0]) < 0.0);
}
