use super::{wrap_angle, AnalysisError};
use crate::design::{target_field, IandIBundle, OrbitKind};
use crate::odesim::{estimate_period, integrate_fixed, Trajectory};

/// One period of a target orbit lifted through `π`, sampled uniformly in time.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSet {
    pub samples: Vec<Vec<f64>>,
    pub period: f64,
    /// Coordinates compared modulo `2π`.
    pub angle_coords: Vec<usize>,
}

impl OrbitSet {
    /// Rotates the sample list so that it starts at index `shift`. The set of
    /// points (and every distance to it) is unchanged.
    pub fn rotated(&self, shift: usize) -> OrbitSet {
        // the last sample closes the loop; rotate the open cycle and re-close it
        let open = &self.samples[..self.samples.len() - 1];
        let mut samples: Vec<Vec<f64>> = open[shift % open.len()..]
            .iter()
            .chain(&open[..shift % open.len()])
            .cloned()
            .collect();
        samples.push(samples[0].clone());
        OrbitSet {
            samples,
            period: self.period,
            angle_coords: self.angle_coords.clone(),
        }
    }
}

const RELAX_PERIODS: f64 = 30.0;
const DETECT_STEPS_PER_PERIOD: f64 = 4000.0;

/// Samples the orbit of the target through `ξ0`, mapped through `π`.
///
/// The period is measured on the target with the second coordinate of `ξ`
/// as section. Targets with a single attracting orbit are first integrated
/// for a while so that `ξ0` settles onto it.
pub fn orbit_samples(
    bundle: &IandIBundle,
    xi0: &[f64],
    samples_per_period: usize,
) -> Result<OrbitSet, AnalysisError> {
    if samples_per_period < 8 {
        return Err(AnalysisError::InvalidSetup(
            "need at least 8 samples per period".into(),
        ));
    }
    let target = target_field(bundle.target.as_ref());
    let nominal = bundle.meta.nominal_period;
    let dt = nominal / DETECT_STEPS_PER_PERIOD;

    let mut start = xi0.to_vec();
    if bundle.target.orbit_kind() == OrbitKind::UniqueAttractiveOrbit {
        let relax = integrate_fixed(&target, &start, 0.0, RELAX_PERIODS * nominal, dt)?;
        start = relax.last_state().unwrap().to_vec();
    }

    let section = |xi: &[f64]| xi[1];
    let mut horizon = 3.0 * nominal;
    let period = loop {
        let probe = integrate_fixed(&target, &start, 0.0, horizon, dt)?;
        if let Some(p) = estimate_period(&probe, section, 1e-6 * nominal) {
            break p;
        }
        if horizon > 64.0 * nominal {
            return Err(AnalysisError::NoPeriod(format!(
                "target from {start:?} shows no repeated crossing of xi2 = 0 within {horizon} s"
            )));
        }
        horizon *= 2.0;
    };

    let one = integrate_fixed(
        &target,
        &start,
        0.0,
        period,
        period / samples_per_period as f64,
    )?;
    let samples = one
        .states()
        .map(|xi| bundle.immersion.pi(xi).iter().copied().collect())
        .collect();
    Ok(OrbitSet {
        samples,
        period,
        angle_coords: bundle.meta.angle_coords.clone(),
    })
}

/// Orbit through the projection of the final state of `traj`.
pub fn limit_orbit(
    bundle: &IandIBundle,
    traj: &Trajectory,
    samples_per_period: usize,
) -> Result<OrbitSet, AnalysisError> {
    let last = traj
        .last_state()
        .ok_or_else(|| AnalysisError::InvalidSetup("empty trajectory".into()))?;
    orbit_samples(bundle, &bundle.project_to_target(last), samples_per_period)
}

/// Distance from `x` to the closed polyline through the orbit samples.
///
/// Angle coordinates enter through their wrapped differences.
pub fn distance_to_orbit(orbit: &OrbitSet, x: &[f64]) -> f64 {
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
        for &c in &orbit.angle_coords {
            d[c] = wrap_angle(d[c]);
        }
        d
    };
    let n = orbit.samples.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = &orbit.samples[i];
        let b = &orbit.samples[(i + 1) % n];
        let d = diff(x, a);
        let e = diff(b, a);
        let ee: f64 = e.iter().map(|v| v * v).sum();
        let w = if ee > 0.0 {
            (d.iter().zip(&e).map(|(p, q)| p * q).sum::<f64>() / ee).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let dist2: f64 = d.iter().zip(&e).map(|(p, q)| (p - w * q).powi(2)).sum();
        best = best.min(dist2);
    }
    best.sqrt()
}

/// Distance from the interpolated state at `t` to the orbit; `NaN` when `t`
/// is outside the trajectory.
pub fn orbital_distance(traj: &Trajectory, orbit: &OrbitSet, t: f64) -> f64 {
    match traj.interpolate(t) {
        Some(x) => distance_to_orbit(orbit, &x),
        None => f64::NAN,
    }
}

/// Largest sampled orbital distance over the final `fraction` of the run.
pub fn tail_orbital_distance(traj: &Trajectory, orbit: &OrbitSet, fraction: f64, stride: usize) -> f64 {
    let start = traj.tail_start(fraction);
    traj.states()
        .skip(start)
        .step_by(stride.max(1))
        .map(|x| distance_to_orbit(orbit, x))
        .fold(0.0, f64::max)
}
