use super::AnalysisError;
use crate::odesim::Trajectory;

/// Exponential envelope `|z(t)| ≈ amplitude · e^{rate·t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub samples: usize,
}

const FLOOR: f64 = 1e-10;
const MIN_SAMPLES: usize = 10;

/// Least-squares line through `(t, ln|z(t)|)` over the samples with
/// `1e-10 ≤ |z| ≤ ½|z(t₀)|`.
pub fn fit_decay(traj_z: &Trajectory) -> Result<DecayFit, AnalysisError> {
    let norm = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let Some(z0) = traj_z.states().next().map(norm) else {
        return Err(AnalysisError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: 0,
        });
    };
    let ceiling = 0.5 * z0;
    let points: Vec<(f64, f64)> = traj_z
        .iter()
        .filter_map(|(t, z)| {
            let r = norm(z);
            (r >= FLOOR && r <= ceiling).then(|| (t, r.ln()))
        })
        .collect();
    if points.len() < MIN_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let (st, sy) = points.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, y) in &points {
        sxx += (t - mt) * (t - mt);
        sxy += (t - mt) * (y - my);
    }
    if sxx == 0.0 {
        return Err(AnalysisError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: 1,
        });
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mt;
    let residual = (points
        .iter()
        .map(|(t, y)| (y - intercept - rate * t).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        rate,
        amplitude: intercept.exp(),
        residual,
        samples: points.len(),
    })
}
