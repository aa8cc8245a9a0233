use super::AnalysisError;
use crate::odesim::{integrate_fixed, FnField};

/// Outcome of a perturbed-pendulum run against the energy bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    pub bound_holds: bool,
    /// Largest `r(x(t)) = ½x₃² − a cos x₁` seen.
    pub max_r: f64,
    pub bound: f64,
    pub r0: f64,
}

fn energy(a: f64, x1: f64, x3: f64) -> f64 {
    0.5 * x3 * x3 - a * x1.cos()
}

/// `r(x(0)) + ℓ₃/ℓ₂ + ℓ₄/ℓ₂²` with `ℓ₃ = ℓ₁|x₃(0)|` and `ℓ₄ = ℓ₁(a + ℓ₁)`.
pub fn lemma1_bound(a: f64, l1: f64, l2: f64, x0: (f64, f64)) -> f64 {
    let l3 = l1 * x0.1.abs();
    let l4 = l1 * (a + l1);
    energy(a, x0.0, x0.1) + l3 / l2 + l4 / (l2 * l2)
}

fn check_args(a: f64, l1: f64, l2: f64, horizon: f64) -> Result<(), AnalysisError> {
    if !(a > 0.0 && l1 >= 0.0 && l2 > 0.0) {
        return Err(AnalysisError::InvalidSetup(format!(
            "need a > 0, l1 >= 0, l2 > 0 (got a = {a}, l1 = {l1}, l2 = {l2})"
        )));
    }
    if !(horizon >= 10.0 / l2) {
        return Err(AnalysisError::InvalidSetup(format!(
            "horizon {horizon} is shorter than 10/l2 = {}",
            10.0 / l2
        )));
    }
    Ok(())
}

/// Simulates `ẍ₁ = −a sin x₁ + ℓ₁e^{−ℓ₂t}` from `x0 = (x₁, x₃)` and compares
/// the energy against [`lemma1_bound`] (with a `1e-9` allowance).
pub fn lemma1_check(
    a: f64,
    l1: f64,
    l2: f64,
    x0: (f64, f64),
    horizon: f64,
) -> Result<Lemma1Report, AnalysisError> {
    lemma1_check_signal(a, l1, l2, x0, horizon, &|t| l1 * (-l2 * t).exp())
}

/// Same as [`lemma1_check`] with an arbitrary perturbation `ε(t)`, which the
/// caller asserts satisfies `|ε(t)| ≤ ℓ₁e^{−ℓ₂t}`.
pub fn lemma1_check_signal(
    a: f64,
    l1: f64,
    l2: f64,
    x0: (f64, f64),
    horizon: f64,
    eps: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<Lemma1Report, AnalysisError> {
    check_args(a, l1, l2, horizon)?;
    // (x₁, x₃, τ) with τ̇ = 1
    let field = FnField::new(3, |s: &[f64], ds: &mut [f64]| {
        ds[0] = s[1];
        ds[1] = -a * s[0].sin() + eps(s[2]);
        ds[2] = 1.0;
    });
    let dt = (2e-3f64).min(0.01 / l2).min(0.01 / a.sqrt());
    let traj = integrate_fixed(&field, &[x0.0, x0.1, 0.0], 0.0, horizon, dt)?;
    let max_r = traj
        .states()
        .map(|s| energy(a, s[0], s[1]))
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = lemma1_bound(a, l1, l2, x0);
    Ok(Lemma1Report {
        bound_holds: max_r <= bound + 1e-9,
        max_r,
        bound,
        r0: energy(a, x0.0, x0.1),
    })
}
