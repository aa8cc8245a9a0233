use super::{AnalysisError, TAIL_FRACTION};
use crate::design::IandIBundle;
use crate::odesim::Trajectory;

/// Relative spread `(max − min)/max(|mean|, 1e-9)` of the target energy,
/// evaluated on the projected state over the final fifth of `traj`.
pub fn energy_drift(bundle: &IandIBundle, traj: &Trajectory) -> Result<f64, AnalysisError> {
    if !bundle.target.has_first_integral() {
        return Err(AnalysisError::NoFirstIntegral);
    }
    let start = traj.tail_start(TAIL_FRACTION);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (t, x) in traj.iter().skip(start) {
        let h = bundle
            .target_energy_at(x)
            .ok_or(AnalysisError::EnergyUndefined(t))?;
        lo = lo.min(h);
        hi = hi.max(h);
        sum += h;
        count += 1;
    }
    if count == 0 {
        return Err(AnalysisError::TooFewSamples { needed: 1, got: 0 });
    }
    let mean = sum / count as f64;
    Ok((hi - lo) / mean.abs().max(1e-9))
}
