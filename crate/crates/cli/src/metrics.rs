//! Summary numbers for one run.

use std::f64::consts::FRAC_PI_2;

use iandi::analysis::{
    energy_drift, fit_decay, input_trajectory, limit_orbit, off_manifold_trajectory,
    oscillation_period, tail_amplitude, tail_orbital_distance, wrap_angle,
    DEFAULT_SAMPLES_PER_PERIOD, TAIL_FRACTION,
};
use iandi::odesim::Trajectory;
use iandi::plants::{cartpend_singularity_margin, PlantKind};
use iandi::IandIBundle;

/// Column order of the metrics CSV. The first nine keys are the stable core;
/// the rest are diagnostics used by the acceptance report.
pub const METRIC_KEYS: [&str; 17] = [
    "period_est",
    "decay_rate",
    "decay_residual",
    "orbital_dist_tail_max",
    "energy_drift_tail",
    "u_abs_max",
    "sing_margin_min",
    "aborted",
    "abort_time",
    "decay_rate_analytic",
    "amplitude_tail",
    "amplitude_tail_min",
    "target_mean_tail",
    "x1_abs_max",
    "state_abs_max",
    "plant_identity_max",
    "t_end",
];

/// Values keyed as in [`METRIC_KEYS`]. Quantities that do not apply to a
/// plant, or could not be measured, are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub period_est: f64,
    pub decay_rate: f64,
    pub decay_residual: f64,
    pub orbital_dist_tail_max: f64,
    pub energy_drift_tail: f64,
    pub u_abs_max: f64,
    pub sing_margin_min: f64,
    pub aborted: bool,
    pub abort_time: f64,
    pub decay_rate_analytic: f64,
    pub amplitude_tail: f64,
    pub amplitude_tail_min: f64,
    /// Mean of the (wrapped, for angles) first target coordinate over the tail.
    pub target_mean_tail: f64,
    pub x1_abs_max: f64,
    pub state_abs_max: f64,
    /// Largest violation of a structural identity the plant should satisfy
    /// along the run (nonlinear cart-pendulum only).
    pub plant_identity_max: f64,
    pub t_end: f64,
}

fn max_abs<'a>(it: impl Iterator<Item = &'a [f64]>) -> f64 {
    it.flat_map(|x| x.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Tail samples used for the orbital distance: at most about 4000 points.
fn tail_stride(traj: &Trajectory) -> usize {
    let tail = traj.len() - traj.tail_start(TAIL_FRACTION);
    (tail / 4000).max(1)
}

impl Metrics {
    pub fn compute(bundle: &IandIBundle, traj: &Trajectory, abort_time: Option<f64>) -> Self {
        let z = off_manifold_trajectory(bundle, traj);
        let (decay_rate, decay_residual) = match fit_decay(&z) {
            Ok(f) => (f.rate, f.residual),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let orbital = match limit_orbit(bundle, traj, DEFAULT_SAMPLES_PER_PERIOD) {
            Ok(orbit) => tail_orbital_distance(traj, &orbit, TAIL_FRACTION, tail_stride(traj)),
            Err(_) => f64::NAN,
        };
        let energy = energy_drift(bundle, traj).unwrap_or(f64::NAN);
        let u_abs_max = max_abs(input_trajectory(bundle, traj).states());
        let sing_margin_min = match &bundle.meta.kind {
            PlantKind::CartPendLinear(_) => traj
                .states()
                .map(|x| cartpend_singularity_margin(bundle, x).unwrap_or(f64::NAN))
                .fold(f64::INFINITY, f64::min),
            PlantKind::CartPendNonlinear(_) => traj
                .states()
                .map(|x| FRAC_PI_2 - x[0].abs())
                .fold(f64::INFINITY, f64::min),
            _ => f64::NAN,
        };
        let plant_identity_max = match &bundle.meta.kind {
            PlantKind::CartPendNonlinear(p) => {
                let shape = p.shape();
                traj.states()
                    .map(|x| shape.ode_residual(x[0]).abs())
                    .fold(0.0, f64::max)
            }
            _ => f64::NAN,
        };
        let (amplitude_tail, amplitude_tail_min) = tail_amplitude(bundle, traj, TAIL_FRACTION);
        let c = bundle.meta.target_coords[0];
        let angle = bundle.meta.angle_coords.contains(&c);
        let start = traj.tail_start(TAIL_FRACTION);
        let tail_len = (traj.len() - start).max(1);
        let target_mean_tail = traj
            .states()
            .skip(start)
            .map(|x| if angle { wrap_angle(x[c]) } else { x[c] })
            .sum::<f64>()
            / tail_len as f64;
        Metrics {
            period_est: oscillation_period(bundle, traj).unwrap_or(f64::NAN),
            decay_rate,
            decay_residual,
            orbital_dist_tail_max: orbital,
            energy_drift_tail: energy,
            u_abs_max,
            sing_margin_min,
            aborted: abort_time.is_some(),
            abort_time: abort_time.unwrap_or(f64::NAN),
            decay_rate_analytic: bundle.meta.kind.analytic_z_rate(),
            amplitude_tail,
            amplitude_tail_min,
            target_mean_tail,
            x1_abs_max: traj.states().map(|x| x[0].abs()).fold(0.0, f64::max),
            state_abs_max: max_abs(traj.states()),
            plant_identity_max,
            t_end: traj.t_end().unwrap_or(f64::NAN),
        }
    }

    pub fn values(&self) -> [f64; 17] {
        [
            self.period_est,
            self.decay_rate,
            self.decay_residual,
            self.orbital_dist_tail_max,
            self.energy_drift_tail,
            self.u_abs_max,
            self.sing_margin_min,
            if self.aborted { 1.0 } else { 0.0 },
            self.abort_time,
            self.decay_rate_analytic,
            self.amplitude_tail,
            self.amplitude_tail_min,
            self.target_mean_tail,
            self.x1_abs_max,
            self.state_abs_max,
            self.plant_identity_max,
            self.t_end,
        ]
    }

    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.len() != METRIC_KEYS.len() {
            return None;
        }
        Some(Metrics {
            period_est: v[0],
            decay_rate: v[1],
            decay_residual: v[2],
            orbital_dist_tail_max: v[3],
            energy_drift_tail: v[4],
            u_abs_max: v[5],
            sing_margin_min: v[6],
            aborted: v[7] != 0.0,
            abort_time: v[8],
            decay_rate_analytic: v[9],
            amplitude_tail: v[10],
            amplitude_tail_min: v[11],
            target_mean_tail: v[12],
            x1_abs_max: v[13],
            state_abs_max: v[14],
            plant_identity_max: v[15],
            t_end: v[16],
        })
    }
}
