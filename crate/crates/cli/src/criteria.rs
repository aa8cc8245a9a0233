//! The twelve acceptance checks.
//!
//! Checks 1, 2, 3, 9, 10 and 11 exercise the library directly. The others read
//! run artifacts (metrics and manifests) produced from the shipped scenarios.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use iandi::analysis::{lemma1_check, lemma2_check, lemma2_l2min, lemma2_r0, simulate, Lemma2Setup};
use iandi::design::{closed_loop_field, on_manifold_control, target_field, validate_bundle};
use iandi::odesim::{integrate_adaptive, integrate_fixed, AdaptiveOptions, FnField, Integrator, VectorField};
use iandi::plants::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metrics::Metrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "criterion {:2} [{}] {}: {}", self.id, self.status, self.title, self.detail)
    }
}

pub const TITLES: [&str; 12] = [
    "design identities",
    "linear oscillator spectrum and solution",
    "pseudoinverse vs closed-form input",
    "wheel pendulum lift",
    "wheel pendulum sweeps",
    "cart-pendulum, linear immersion",
    "cart-pendulum, nonlinear immersion",
    "DC-AC steady state",
    "energy bound under decaying perturbation",
    "cone invariance under decaying perturbation",
    "integrator oracles",
    "determinism",
];

/// Collects named sub-checks into one outcome.
struct Checks {
    id: u8,
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new(id: u8) -> Self {
        Checks { id, failed: vec![], notes: vec![] }
    }

    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failed.push(what);
        }
    }

    fn finish(self) -> Outcome {
        let (status, detail) = if self.failed.is_empty() {
            (Status::Pass, self.notes.join("; "))
        } else {
            (Status::Fail, format!("failed: {}", self.failed.join("; ")))
        };
        Outcome {
            id: self.id,
            title: TITLES[self.id as usize - 1],
            status,
            detail,
        }
    }
}

pub fn skipped(id: u8, why: impl Into<String>) -> Outcome {
    Outcome {
        id,
        title: TITLES[id as usize - 1],
        status: Status::Skipped,
        detail: why.into(),
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

pub fn identities() -> Outcome {
    let mut c = Checks::new(1);
    for name in presets::NAMES {
        let b = presets::lookup(name).unwrap().build().unwrap();
        let r = validate_bundle(&b, 1000, 42);
        c.check(
            r.fbi_max <= 1e-9 && r.manifold_max <= 1e-12 && r.constraint_max <= 1e-9,
            format!(
                "{name}: fbi {:.1e}, manifold {:.1e}, constraint {:.1e}",
                r.fbi_max, r.manifold_max, r.constraint_max
            ),
        );
    }
    c.finish()
}

fn linear_matrix(field: &dyn VectorField) -> DMatrix<f64> {
    let n = field.dimension();
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        a.set_column(j, &DVector::from_vec(field.eval_vec(&e).unwrap()));
    }
    a
}

pub fn lti_spectrum() -> Outcome {
    let mut c = Checks::new(2);
    let b = make_lti(LtiParams::default()).unwrap();
    let a = linear_matrix(&closed_loop_field(&b));
    let mut eig: Vec<(f64, f64)> = a.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    eig.sort_by(|p, q| p.1.total_cmp(&q.1).then(p.0.total_cmp(&q.0)));
    let expect = [(0.0, -1.0), (-1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)];
    let err = eig
        .iter()
        .zip(expect)
        .map(|(g, w)| (g.0 - w.0).abs().max((g.1 - w.1).abs()))
        .fold(0.0, f64::max);
    c.check(err <= 1e-10, format!("eigenvalues {eig:?}, error {err:.1e}"));

    let j = linear_matrix(&target_field(b.target.as_ref()));
    let t_map = b.immersion.jacobian(&[0.0, 0.0]);
    let xi0 = DVector::from_vec(vec![0.6, -0.8]);
    let x0 = &t_map * &xi0;
    let tr = simulate(&b, x0.as_slice(), 0.0, 4.0 * PI, &Integrator::Fixed { dt: 1e-3 }).unwrap();
    let worst = tr
        .iter()
        .map(|(t, x)| {
            let want = &t_map * ((&j * t).exp() * &xi0);
            x.iter().zip(want.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    c.check(worst <= 1e-7, format!("trajectory vs T exp(Jt) xi0: {worst:.1e}"));
    c.finish()
}

pub fn pseudoinverse() -> Outcome {
    let mut c = Checks::new(3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases: [(&str, Box<dyn Fn(&[f64]) -> Vec<f64>>); 4] = [
        (presets::IWP_PAPER, Box::new(|xi| vec![iwp_c(&presets::iwp_paper(), xi)])),
        (presets::CARTPEND_LIN_PAPER, Box::new(|xi| vec![cartpend_linear_c(&presets::cartpend_lin_paper(), xi)])),
        (presets::CARTPEND_NL_PAPER, Box::new(|xi| vec![cartpend_nonlinear_c(&presets::cartpend_nl_paper(), xi)])),
        (presets::DCAC_DEFAULT, Box::new(|xi| dcac_c(&presets::dcac_default(), xi).to_vec())),
    ];
    for (name, closed) in cases {
        let b = presets::lookup(name).unwrap().build().unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let xi: Vec<f64> = b
                .xi_sample_box
                .lower
                .iter()
                .zip(&b.xi_sample_box.upper)
                .map(|(&lo, &hi)| rng.random_range(lo..hi))
                .collect();
            let generic = on_manifold_control(&b, &xi).unwrap();
            for (g, w) in generic.iter().zip(closed(&xi)) {
                worst = worst.max((g - w).abs());
            }
        }
        c.check(worst <= 1e-10, format!("{name}: {worst:.1e}"));
    }
    c.finish()
}

pub fn iwp_lift(m: &Metrics) -> Outcome {
    let mut c = Checks::new(4);
    c.check(!m.aborted, format!("aborted = {}", m.aborted));
    c.check(
        within(m.decay_rate, m.decay_rate_analytic, 0.10),
        format!("z decay rate {:.4} (design {:.4})", m.decay_rate, m.decay_rate_analytic),
    );
    c.check(m.energy_drift_tail <= 1e-2, format!("tail energy drift {:.1e}", m.energy_drift_tail));
    c.check(
        m.orbital_dist_tail_max <= 0.01,
        format!("tail orbital distance {:.1e}", m.orbital_dist_tail_max),
    );
    c.check(
        m.target_mean_tail.abs() <= 0.05,
        format!("tail mean of wrapped x1 {:.1e}", m.target_mean_tail),
    );
    c.finish()
}

/// One run of a sweep: its manifest parameters, initial state and metrics.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub params: BTreeMap<String, f64>,
    pub x0: Vec<f64>,
    pub metrics: Metrics,
}

fn strictly_increasing(v: &[(f64, f64)]) -> bool {
    let mut v = v.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.windows(2).all(|w| w[1].1 > w[0].1)
}

fn fmt_pairs(v: &[(f64, f64)]) -> String {
    v.iter().map(|(k, y)| format!("{k:.3} -> {y:.4}")).collect::<Vec<_>>().join(", ")
}

/// Gain sweep, initial-condition sweep and pole sweep; `None` marks a missing sweep.
pub fn iwp_sweeps(k: Option<&[SweepRow]>, ic: Option<&[SweepRow]>, pole: Option<&[SweepRow]>) -> Outcome {
    let mut c = Checks::new(5);
    let mut missing = vec![];
    match k {
        Some(rows) => {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| {
                    let p = IwpParams {
                        m: r.params["m"],
                        b: r.params["b"],
                        k: r.params["k"],
                        gamma1: r.params["gamma1"],
                        gamma2: r.params["gamma2"],
                    };
                    (p.a().abs(), r.metrics.period_est)
                })
                .collect();
            let falling: Vec<(f64, f64)> = pts.iter().map(|&(a, p)| (a, -p)).collect();
            c.check(
                strictly_increasing(&falling) && rows.len() >= 2,
                format!("gain sweep |a| -> period: {}", fmt_pairs(&pts)),
            );
        }
        None => missing.push("gain sweep"),
    }
    match ic {
        Some(rows) => {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x0[0], r.metrics.amplitude_tail)).collect();
            c.check(
                strictly_increasing(&pts) && rows.len() >= 2,
                format!("initial-condition sweep x1(0) -> amplitude: {}", fmt_pairs(&pts)),
            );
        }
        None => missing.push("initial-condition sweep"),
    }
    match pole {
        Some(rows) => {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.params["gamma1"] / 2.0, -r.metrics.decay_rate))
                .collect();
            c.check(
                strictly_increasing(&pts) && rows.len() >= 2,
                format!("pole sweep p -> decay speed: {}", fmt_pairs(&pts)),
            );
        }
        None => missing.push("pole sweep"),
    }
    let out = c.finish();
    if out.status == Status::Pass && !missing.is_empty() {
        return skipped(5, format!("missing {}", missing.join(", ")));
    }
    out
}

pub fn cartpend_linear(m: &Metrics) -> Outcome {
    let mut c = Checks::new(6);
    let beta = 0.25f64.acos();
    c.check(!m.aborted, format!("aborted = {}", m.aborted));
    c.check(m.sing_margin_min > 0.0, format!("min singularity margin {:.4}", m.sing_margin_min));
    c.check(m.x1_abs_max < beta, format!("max |x1| {:.4} < beta* {beta:.4}", m.x1_abs_max));
    c.check(
        within(m.decay_rate, m.decay_rate_analytic, 0.10),
        format!("z decay rate {:.4} (design {:.4})", m.decay_rate, m.decay_rate_analytic),
    );
    c.finish()
}

pub fn cartpend_nonlinear(m: &Metrics, t1: f64) -> Outcome {
    let mut c = Checks::new(7);
    c.check(
        !m.aborted && m.state_abs_max.is_finite() && (m.t_end - t1).abs() < 1e-9,
        format!("ran to t = {} with max |x| {:.3}", m.t_end, m.state_abs_max),
    );
    c.check(
        m.x1_abs_max < FRAC_PI_2 - 1e-3,
        format!("max |x1| {:.4} < pi/2 - 1e-3", m.x1_abs_max),
    );
    c.check(m.energy_drift_tail <= 1e-2, format!("tail energy drift {:.1e}", m.energy_drift_tail));
    c.check(
        m.plant_identity_max <= 1e-12,
        format!("1 + a2 k' cos x1 + a: {:.1e}", m.plant_identity_max),
    );
    c.finish()
}

pub fn dcac(m: &Metrics, amplitude: f64, omega: f64) -> Outcome {
    let mut c = Checks::new(8);
    c.check(!m.aborted, format!("aborted = {}", m.aborted));
    c.check(m.u_abs_max <= SATURATION_LIMIT, format!("max |u| {:.4}", m.u_abs_max));
    c.check(
        within(m.amplitude_tail, amplitude, 0.01) && within(m.amplitude_tail_min, amplitude, 0.01),
        format!("tail radius {:.4} (min {:.4}) vs A = {amplitude}", m.amplitude_tail, m.amplitude_tail_min),
    );
    let period = 2.0 * PI / omega;
    c.check(
        within(m.period_est, period, 0.01),
        format!("period {:.6} vs {period:.6}", m.period_est),
    );
    c.check(
        within(m.decay_rate, m.decay_rate_analytic, 0.02),
        format!("z decay rate {:.2} (design {:.2})", m.decay_rate, m.decay_rate_analytic),
    );
    c.finish()
}

pub fn lemma1() -> Outcome {
    let mut c = Checks::new(9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_gap = f64::INFINITY;
    let mut held = 0;
    for _ in 0..20 {
        let a = rng.random_range(0.05..2.0);
        let l1 = rng.random_range(0.0..1.0);
        let l2 = rng.random_range(0.1..3.0);
        let x0 = (rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
        let r = lemma1_check(a, l1, l2, x0, 10.0 / l2 + 20.0).unwrap();
        worst_gap = worst_gap.min(r.bound - r.max_r);
        if r.bound_holds {
            held += 1;
        } else {
            c.check(false, format!("a = {a:.3}, l1 = {l1:.3}, l2 = {l2:.3}, x0 = {x0:?}: max r {} > bound {}", r.max_r, r.bound));
        }
    }
    c.check(held == 20, format!("{held}/20 random cases within the bound (smallest slack {worst_gap:.3})"));
    let mut drift: f64 = 0.0;
    for _ in 0..5 {
        let a = rng.random_range(0.05..2.0);
        let x0 = (rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
        let r = lemma1_check(a, 0.0, 1.0, x0, 50.0).unwrap();
        drift = drift.max(r.max_r - r.r0);
    }
    c.check(drift <= 1e-8, format!("unperturbed energy rise {drift:.1e}"));
    c.finish()
}

/// Cart-pendulum cone dynamics with `k = −4`, `a₁ = 9.8`, `a₂ = 1`, `ℓ₁ = 0.1`
/// from `w(0) = (0.3, 0)`.
pub fn lemma2_reference() -> Lemma2Setup {
    Lemma2Setup::new(-4.0, 9.8, 1.0, 0.1, [0.3, 0.0]).unwrap()
}

pub fn lemma2() -> Outcome {
    let mut c = Checks::new(10);
    let s = lemma2_reference();
    let r0 = match lemma2_r0(&s) {
        Ok(r) => r,
        Err(e) => {
            c.check(false, e.to_string());
            return c.finish();
        }
    };
    c.check(s.f(r0).abs() <= 1e-10, format!("F(r0 = {r0:.6}) = {:.1e}", s.f(r0)));
    let min_beyond = (1..=200).map(|i| s.f(r0 + 0.05 * i as f64)).fold(f64::INFINITY, f64::min);
    c.check(min_beyond >= 0.0, format!("min F beyond r0 {min_beyond:.3e}"));
    let l2min = lemma2_l2min(&s).unwrap();
    let rep = lemma2_check(&s, 2.0 * l2min, 30.0).unwrap();
    c.check(
        rep.stayed_in_cone,
        format!("l2 = 2 x {l2min:.4}: smallest cone margin {:.4}", rep.min_margin),
    );
    c.finish()
}

pub fn integrators() -> Outcome {
    let mut c = Checks::new(11);
    let rot = FnField::new(2, |x: &[f64], dx: &mut [f64]| {
        dx[0] = x[1];
        dx[1] = -x[0];
    });
    let dec = FnField::new(1, |x: &[f64], dx: &mut [f64]| dx[0] = -x[0]);
    let end_err = |tr: iandi::Trajectory, want: &[f64]| {
        tr.last_state().unwrap().iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };

    let e = end_err(integrate_fixed(&rot, &[1.0, 0.0], 0.0, 2.0 * PI, 1e-3).unwrap(), &[1.0, 0.0]);
    c.check(e <= 1e-8, format!("RK4 rotation {e:.1e}"));
    let e = end_err(integrate_fixed(&dec, &[1.0], 0.0, 5.0, 1e-3).unwrap(), &[(-5.0f64).exp()]);
    c.check(e <= 1e-10, format!("RK4 exponential {e:.1e}"));
    let tight = AdaptiveOptions::new(1e-9, 1e-12);
    let e = end_err(integrate_adaptive(&rot, &[1.0, 0.0], 0.0, 2.0 * PI, &tight).unwrap(), &[1.0, 0.0]);
    c.check(e <= 1e-7, format!("DP5 rotation {e:.1e}"));
    let e = end_err(integrate_adaptive(&dec, &[1.0], 0.0, 5.0, &tight).unwrap(), &[(-5.0f64).exp()]);
    c.check(e <= 1e-8, format!("DP5 exponential {e:.1e}"));

    let coarse = end_err(integrate_fixed(&rot, &[1.0, 0.0], 0.0, 2.0 * PI, 0.1).unwrap(), &[1.0, 0.0]);
    let fine = end_err(integrate_fixed(&rot, &[1.0, 0.0], 0.0, 2.0 * PI, 0.05).unwrap(), &[1.0, 0.0]);
    let ratio = coarse / fine;
    c.check((12.0..=20.0).contains(&ratio), format!("step-halving error ratio {ratio:.2}"));
    c.finish()
}

pub fn determinism(first: &[u8], second: &[u8]) -> Outcome {
    let mut c = Checks::new(12);
    c.check(
        !first.is_empty() && first == second,
        format!("trajectory CSVs of {} and {} bytes identical: {}", first.len(), second.len(), first == second),
    );
    c.finish()
}
