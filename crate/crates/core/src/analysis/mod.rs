//! Post-simulation metrics and numerical checks of the perturbation bounds.
//!
//! The metrics work on plain [`Trajectory`] values produced by
//! [`simulate`]: distance to a lifted target orbit, exponential decay of the
//! off-manifold coordinate, and drift of the target energy along the
//! projected state. The two harnesses at the end reproduce the comparison
//! arguments that keep the pendulum designs bounded while `z` decays.

mod decay;
mod energy;
mod lemma1;
mod lemma2;
mod orbit;

pub use decay::{fit_decay, DecayFit};
pub use energy::energy_drift;
pub use lemma1::{lemma1_bound, lemma1_check, lemma1_check_signal, Lemma1Report};
pub use lemma2::{lemma2_check, lemma2_l2min, lemma2_r0, Lemma2Report, Lemma2Setup};
pub use orbit::{
    distance_to_orbit, limit_orbit, orbit_samples, orbital_distance, tail_orbital_distance, OrbitSet,
};

use std::f64::consts::PI;

use thiserror::Error;

use crate::design::{closed_loop_field, DesignError, IandIBundle};
use crate::odesim::{
    default_min_separation, estimate_period, IntegrationError, Integrator, Trajectory,
};

/// Samples per period used by [`orbit_samples`] unless told otherwise.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 2048;

/// Fraction of a run treated as its tail by the metrics.
pub const TAIL_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Error)]
pub enum AnalysisError {
    #[error("no periodic motion detected: {0}")]
    NoPeriod(String),
    #[error("need at least {needed} usable samples, found {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("the target has no first integral")]
    NoFirstIntegral,
    #[error("first integral undefined at t = {0}")]
    EnergyUndefined(f64),
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("no root of F found: {0}")]
    NoRoot(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// Principal value in `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Integrates the closed loop `ẋ = f(x) + g(x)v(x, φ(x))` from `x0`.
pub fn simulate(
    bundle: &IandIBundle,
    x0: &[f64],
    t0: f64,
    t1: f64,
    integrator: &Integrator,
) -> Result<Trajectory, IntegrationError> {
    integrator.integrate(&closed_loop_field(bundle), x0, t0, t1)
}

/// `z(t) = φ(x(t))` along a closed-loop trajectory.
pub fn off_manifold_trajectory(bundle: &IandIBundle, traj: &Trajectory) -> Trajectory {
    traj.map_states(bundle.n() - bundle.p(), |x| {
        bundle.manifold.phi(x).iter().copied().collect()
    })
}

/// `u(t) = v(x(t), φ(x(t)))` along a closed-loop trajectory.
pub fn input_trajectory(bundle: &IandIBundle, traj: &Trajectory) -> Trajectory {
    traj.map_states(bundle.m(), |x| bundle.control(x).iter().copied().collect())
}

/// Section used to time oscillations: `sin x` for an angle, `x` otherwise,
/// applied to the first target coordinate.
pub fn oscillation_section(bundle: &IandIBundle) -> impl Fn(&[f64]) -> f64 + '_ {
    let c = bundle.meta.target_coords[0];
    let angle = bundle.meta.angle_coords.contains(&c);
    move |x: &[f64]| if angle { x[c].sin() } else { x[c] }
}

/// Oscillation period over the second half of the run.
pub fn oscillation_period(bundle: &IandIBundle, traj: &Trajectory) -> Option<f64> {
    let tail = traj.slice_from(traj.tail_start(0.5));
    estimate_period(&tail, oscillation_section(bundle), default_min_separation(traj))
}

/// Tail amplitude and its spread.
///
/// For an angle-type first target coordinate this is the largest wrapped
/// excursion; otherwise it is the Euclidean norm of the target coordinates,
/// reported as `(mean, min)` over the tail.
pub fn tail_amplitude(bundle: &IandIBundle, traj: &Trajectory, fraction: f64) -> (f64, f64) {
    let start = traj.tail_start(fraction);
    let coords = &bundle.meta.target_coords;
    if bundle.meta.angle_coords.contains(&coords[0]) {
        let a = traj
            .states()
            .skip(start)
            .map(|x| wrap_angle(x[coords[0]]).abs())
            .fold(0.0, f64::max);
        return (a, a);
    }
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut count = 0usize;
    for x in traj.states().skip(start) {
        let r = coords.iter().map(|&c| x[c] * x[c]).sum::<f64>().sqrt();
        sum += r;
        min = min.min(r);
        count += 1;
    }
    if count == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (sum / count as f64, min)
    }
}
