use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iandi::analysis::simulate;
use iandi::design::*;
use iandi::linalg::{left_annihilator, numerical_jacobian};
use iandi::odesim::{integrate_fixed, Integrator, VectorField};
use iandi::plants::*;

fn all_bundles() -> Vec<IandIBundle> {
    presets::NAMES
        .iter()
        .map(|n| presets::lookup(n).unwrap().build().unwrap())
        .collect()
}

fn draw(rng: &mut ChaCha8Rng, b: &SampleBox) -> Vec<f64> {
    b.lower
        .iter()
        .zip(&b.upper)
        .map(|(&lo, &hi)| rng.random_range(lo..hi))
        .collect()
}

#[test]
fn every_bundle_validates_on_thousand_points() {
    for b in all_bundles() {
        let r = validate_bundle(&b, 1000, 42);
        assert!(r.passes(), "{}", r.to_kv_text());
        assert_eq!(r.xi_samples + r.xi_skipped, 1000);
    }
}

#[test]
fn validation_is_deterministic_and_single_point_works() {
    let b = make_iwp(presets::iwp_paper()).unwrap();
    assert_eq!(validate_bundle(&b, 50, 9), validate_bundle(&b, 50, 9));
    let one = validate_bundle(&b, 1, 3);
    assert_eq!(one.xi_samples, 1);
    assert!(one.passes());
}

#[test]
fn pseudoinverse_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let p = presets::iwp_paper();
    let b = make_iwp(p).unwrap();
    for _ in 0..1000 {
        let xi = draw(&mut rng, &b.xi_sample_box);
        let c = on_manifold_control(&b, &xi).unwrap();
        assert_abs_diff_eq!(c[0], iwp_c(&p, &xi), epsilon = 1e-10);
    }

    let p = presets::cartpend_lin_paper();
    let b = make_cartpend_linear(p).unwrap();
    for _ in 0..1000 {
        let xi = draw(&mut rng, &b.xi_sample_box);
        let c = on_manifold_control(&b, &xi).unwrap();
        assert_abs_diff_eq!(c[0], cartpend_linear_c(&p, &xi), epsilon = 1e-10);
    }

    let p = presets::cartpend_nl_paper();
    let b = make_cartpend_nonlinear(p).unwrap();
    for _ in 0..1000 {
        let xi = draw(&mut rng, &b.xi_sample_box);
        let c = on_manifold_control(&b, &xi).unwrap();
        assert_abs_diff_eq!(c[0], cartpend_nonlinear_c(&p, &xi), epsilon = 1e-10);
    }

    let p = presets::dcac_default();
    let b = make_dcac(p).unwrap();
    for _ in 0..1000 {
        let xi = draw(&mut rng, &b.xi_sample_box);
        let c = on_manifold_control(&b, &xi).unwrap();
        let expect = dcac_c(&p, &xi);
        assert_abs_diff_eq!(c[0], expect[0], epsilon = 1e-10);
        assert_abs_diff_eq!(c[1], expect[1], epsilon = 1e-10);
    }
}

#[test]
fn equilibrium_residuals_vanish() {
    for b in all_bundles() {
        let xi = vec![0.0; b.p()];
        assert!(fbi_residual(&b, &xi).unwrap().amax() <= 1e-14, "{}", b.name);
        assert!(constraint_residual(&b, &xi).unwrap().amax() <= 1e-14, "{}", b.name);
    }
}

#[test]
fn iwp_reference_point() {
    let b = make_iwp(presets::iwp_paper()).unwrap();
    assert!(fbi_residual(&b, &[0.3, 0.5]).unwrap().amax() <= 1e-9);
    let f = closed_loop_field(&b);
    assert_eq!(f.eval_vec(&[0.0; 4]).unwrap(), vec![0.0; 4]);
}

#[test]
fn lti_grid_residuals_are_tiny() {
    let b = make_lti(LtiParams::default()).unwrap();
    for i in 0..10 {
        for j in 0..10 {
            let xi = [-2.0 + 4.0 * i as f64 / 9.0, -2.0 + 4.0 * j as f64 / 9.0];
            assert!(fbi_residual(&b, &xi).unwrap().amax() <= 1e-11);
            assert_eq!(manifold_residual(&b, &xi).amax(), 0.0);
        }
    }
}

struct Scaled(Arc<dyn Controller>, f64);

impl Controller for Scaled {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        self.0.control(x, z) * self.1
    }
}

#[test]
fn corrupted_bundles_are_caught() {
    let mut b = make_iwp(presets::iwp_paper()).unwrap();
    b.controller = Arc::new(Scaled(b.controller.clone(), 1.001));
    let r = validate_bundle(&b, 1000, 42);
    assert!(r.constraint_max > 1e-6);
    assert!(!r.passes());

    let mut b = make_iwp(presets::iwp_paper()).unwrap();
    let wrong = make_iwp(IwpParams { k: -3.0, ..presets::iwp_paper() }).unwrap();
    b.target = wrong.target.clone();
    let r = validate_bundle(&b, 1000, 42);
    assert!(r.fbi_max > 1e-3);
}

#[test]
fn lti_closed_loop_spectrum_and_solution() {
    let b = make_lti(LtiParams::default()).unwrap();
    let f = closed_loop_field(&b);
    let mut a = DMatrix::zeros(4, 4);
    for j in 0..4 {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        a.set_column(j, &DVector::from_vec(f.eval_vec(&e).unwrap()));
    }
    let fd = numerical_jacobian(|x| DVector::from_vec(f.eval_vec(x).unwrap()), &[0.3, -0.2, 1.0, 0.7]);
    assert!((&fd - &a).amax() < 1e-7);

    let mut eig: Vec<(f64, f64)> = a.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect();
    eig.sort_by(|p, q| p.1.total_cmp(&q.1).then(p.0.total_cmp(&q.0)));
    let expect = [(0.0, -1.0), (-1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)];
    for (got, want) in eig.iter().zip(expect) {
        // a defective double root would only be accurate to sqrt(eps)
        assert!((got.0 - want.0).abs() < 1e-10 && (got.1 - want.1).abs() < 1e-10, "{eig:?}");
    }

    let xi0 = [0.6, -0.8];
    let x0 = b.immersion.pi(&xi0);
    let tr = simulate(&b, x0.as_slice(), 0.0, 4.0 * PI, &Integrator::Fixed { dt: 1e-3 }).unwrap();
    for (t, x) in tr.iter() {
        let xi = [xi0[0] * t.cos() + xi0[1] * t.sin(), -xi0[0] * t.sin() + xi0[1] * t.cos()];
        let want = b.immersion.pi(&xi);
        for i in 0..4 {
            assert!((x[i] - want[i]).abs() < 1e-7);
        }
    }
}

#[test]
fn lti_control_equals_gain_times_state() {
    let p = LtiParams {
        p: Matrix2::new(1.5, 0.2, 0.0, 0.8),
        r: Matrix2::new(0.3, -0.1, 0.4, 0.9),
    };
    let b = make_lti(p.clone()).unwrap();
    let k = DMatrix::from_row_slice(
        2,
        4,
        &[p.p[(0, 0)], p.p[(0, 1)], p.r[(0, 0)], p.r[(0, 1)] + 1.0, p.p[(1, 0)], p.p[(1, 1)], p.r[(1, 0)] - 1.0, p.r[(1, 1)]],
    );
    let x = b.immersion.pi(&[0.4, 1.3]);
    let u = b.control(x.as_slice());
    assert!((u - &k * &x).amax() < 1e-14);
}

#[test]
fn linear_bundles_satisfy_set_identity() {
    for name in [presets::LTI_IDENTITY, presets::IWP_PAPER, presets::CARTPEND_LIN_PAPER] {
        let b = presets::lookup(name).unwrap().build().unwrap();
        let t = b.immersion.jacobian(&[0.0, 0.0]);
        let phi = b.manifold.jacobian(&[0.0; 4]);
        assert!(linear_set_identity_holds(&t, &phi, 1e-12), "{name}");
    }
}

fn z_rate(b: &IandIBundle, x: &[f64]) -> DVector<f64> {
    let xdot = DVector::from_vec(closed_loop_field(b).eval_vec(x).unwrap());
    b.manifold.jacobian(x) * xdot
}

#[test]
fn pendulum_z_dynamics_are_exactly_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cases: Vec<(IandIBundle, f64, f64)> = vec![
        (make_iwp(presets::iwp_paper()).unwrap(), 2.0, 1.0),
        (make_cartpend_linear(presets::cartpend_lin_paper()).unwrap(), 2.0, 2.0),
        (make_cartpend_nonlinear(presets::cartpend_nl_paper()).unwrap(), 1.0, 1.0),
    ];
    for (b, g1, g2) in cases {
        for _ in 0..200 {
            let x = draw(&mut rng, &b.x_sample_box);
            let z = b.off_manifold(&x);
            let zdot = z_rate(&b, &x);
            let scale = 1.0 + z.amax();
            assert!((zdot[0] - z[1]).abs() <= 1e-10 * scale, "{}", b.name);
            assert!((zdot[1] + g2 * z[0] + g1 * z[1]).abs() <= 1e-10 * scale * 10.0, "{}", b.name);
        }
    }
}

#[test]
fn converter_z_decays_at_analytic_rate() {
    let b = make_dcac(presets::dcac_default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rate = b.meta.kind.analytic_z_rate();
    for _ in 0..100 {
        let x = draw(&mut rng, &b.x_sample_box);
        let z = b.off_manifold(&x);
        let zdot = z_rate(&b, &x);
        assert!((zdot - rate * &z).amax() <= 1e-9 * (1.0 + z.amax()) * 1e3);
    }
}

#[test]
fn closed_loop_on_manifold_moves_with_target() {
    for b in all_bundles() {
        let xi = b.xi_sample_box.upper.iter().map(|u| 0.3 * u).collect::<Vec<_>>();
        let x = b.immersion.pi(&xi);
        let xdot = DVector::from_vec(closed_loop_field(&b).eval_vec(x.as_slice()).unwrap());
        let lifted = b.immersion.jacobian(&xi) * b.target.alpha(&xi);
        assert!((xdot - &lifted).amax() <= 1e-9 * (1.0 + lifted.amax()), "{}", b.name);
    }
}

#[test]
fn invariance_over_ten_periods() {
    for name in [presets::LTI_IDENTITY, presets::IWP_PAPER, presets::CARTPEND_LIN_PAPER, presets::CARTPEND_NL_PAPER] {
        let b = presets::lookup(name).unwrap().build().unwrap();
        let x0 = b.immersion.pi(&[0.4, 0.0]);
        let tr = simulate(&b, x0.as_slice(), 0.0, 10.0 * b.meta.nominal_period, &Integrator::Fixed { dt: 1e-3 }).unwrap();
        let worst = tr.states().map(|x| b.off_manifold(x).amax()).fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{name}: {worst}");
    }
}

#[test]
fn augmented_and_closed_loop_agree() {
    for b in all_bundles() {
        let x0: Vec<f64> = b.x_sample_box.upper.iter().map(|u| 0.2 * u).collect();
        let (t1, dt) = (2.0 * b.meta.nominal_period, b.meta.nominal_dt);
        let cl = integrate_fixed(&closed_loop_field(&b), &x0, 0.0, t1, dt).unwrap();
        let aug = augmented_field(&b);
        let at = integrate_fixed(&aug, &aug.initial_state(&x0), 0.0, t1, dt).unwrap();
        for i in 0..cl.len() {
            let (x, s) = (cl.state(i), at.state(i));
            let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in 0..b.n() {
                assert!((x[k] - s[k]).abs() <= 1e-8 * scale, "{} state", b.name);
            }
            let phi = b.off_manifold(&s[..b.n()]);
            for k in 0..phi.len() {
                assert!((phi[k] - s[b.n() + k]).abs() <= 1e-8 * scale, "{} z", b.name);
            }
        }
    }
}

#[test]
fn iwp_z_matches_linear_solution() {
    let p = presets::iwp_paper();
    let b = make_iwp(p).unwrap();
    let aug = augmented_field(&b);
    let x0 = [0.5, 0.2, 0.1, -0.3];
    let s0 = aug.initial_state(&x0);
    let tr = integrate_fixed(&aug, &s0, 0.0, 10.0, 1e-3).unwrap();
    // double pole at -1: z1 = (c1 + c2 t) e^{-t}
    let (c1, c2) = (s0[4], s0[5] + s0[4]);
    for (t, s) in tr.iter() {
        let e = (-t).exp();
        assert!((s[4] - (c1 + c2 * t) * e).abs() < 1e-7);
        assert!((s[5] - (c2 - c1 - c2 * t) * e).abs() < 1e-7);
    }
}

#[test]
fn annihilator_properties_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, m) in [(2, 1), (4, 1), (4, 2), (6, 2)] {
        for _ in 0..100 {
            let g = DMatrix::from_fn(n, m, |_, _| rng.random_range(-2.0..2.0));
            let bmat = left_annihilator(&g).unwrap();
            assert_eq!(bmat.shape(), (n - m, n));
            assert!((&bmat * &g).amax() <= 1e-12);
            assert!((&bmat * bmat.transpose() - DMatrix::identity(n - m, n - m)).amax() <= 1e-12);
        }
    }
    let g = DMatrix::from_column_slice(4, 1, &[0.0, 0.0, -10.0, 1.0]);
    let bmat = left_annihilator(&g).unwrap();
    assert_eq!(bmat.shape(), (3, 4));
    let g = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
    let bmat = left_annihilator(&g).unwrap();
    assert_abs_diff_eq!(bmat[(0, 0)], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(bmat[(0, 1)].abs(), 1.0, epsilon = 1e-15);
}

#[test]
fn target_energies_are_conserved() {
    let cases = [
        (presets::IWP_PAPER, [0.5, 0.0]),
        (presets::CARTPEND_LIN_PAPER, [0.5, 0.0]),
        (presets::CARTPEND_NL_PAPER, [0.3, 0.0]),
        (presets::LTI_IDENTITY, [1.0, 0.5]),
    ];
    for (name, xi0) in cases {
        let b = presets::lookup(name).unwrap().build().unwrap();
        let tf = target_field(b.target.as_ref());
        let tr = integrate_fixed(&tf, &xi0, 0.0, 10.0 * b.meta.nominal_period, 1e-3).unwrap();
        let h0 = b.target.first_integral(&xi0).unwrap();
        for xi in tr.states() {
            let h = b.target.first_integral(xi).unwrap();
            assert!((h - h0).abs() <= 1e-6 * h0.abs().max(1e-9), "{name}");
        }
    }
}

#[test]
fn converter_circle_is_invariant_and_attracting() {
    let p = presets::dcac_default();
    let b = make_dcac(p).unwrap();
    let tf = target_field(b.target.as_ref());
    let on = integrate_fixed(&tf, &[p.amplitude, 0.0], 0.0, 0.1, 1e-6).unwrap();
    for xi in on.states() {
        assert!(((xi[0] * xi[0] + xi[1] * xi[1]).sqrt() - p.amplitude).abs() <= 1e-8 * p.amplitude);
    }
    let inside = integrate_fixed(&tf, &[p.amplitude / 2.0, 0.0], 0.0, 0.01, 1e-6).unwrap();
    let mut last = 0.0;
    for xi in inside.states() {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        assert!(r >= last - 1e-9);
        last = r;
    }
    assert!((last - p.amplitude).abs() < 0.01 * p.amplitude);
}
