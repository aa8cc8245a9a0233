use super::{check_request, eval_checked, IntegrationError, StepFailure, Trajectory, VectorField};

/// Tolerances and step limits for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: Option<f64>,
    /// Steps smaller than this abort the run.
    pub h_min: f64,
    pub max_steps: usize,
}

impl AdaptiveOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-9,
            h0: None,
            h_max: None,
            h_min: 1e-14,
            max_steps: 10_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau. The fields are autonomous so the nodes c_i
// are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) with local extrapolation and first-same-as-last reuse.
///
/// A step is accepted when every component of the embedded error estimate is
/// at most `atol + rtol·max(|x_old|, |x_new|)`. Every accepted step is stored.
/// `t1 == t0` returns the single initial sample.
pub fn integrate_adaptive<V: VectorField + ?Sized>(
    field: &V,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &AdaptiveOptions,
) -> Result<Trajectory, IntegrationError> {
    let n = field.dimension();
    check_request(n, x0, t0, t1)?;
    if t1 < t0 {
        return Err(IntegrationError::InvalidArgument(format!(
            "t1 = {t1} precedes t0 = {t0}"
        )));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(IntegrationError::InvalidArgument(
            "rtol and atol must be positive".into(),
        ));
    }

    let mut traj = Trajectory::new(n);
    traj.push(t0, x0);
    if t1 == t0 {
        return Ok(traj);
    }

    let span = t1 - t0;
    let h_max = opts.h_max.unwrap_or(span).min(span);
    let mut x = x0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut x_new = vec![0.0; n];

    if let Err(f) = eval_checked(field, &x, &mut k[0]) {
        return Err(f.into_error(t0, traj));
    }
    let mut h = match opts.h0 {
        Some(h) => h,
        None => match initial_step(field, &x, &k[0], opts, &mut tmp) {
            Ok(h) => h,
            Err(f) => return Err(f.into_error(t0, traj)),
        },
    }
    .min(h_max);

    let mut t = t0;
    let mut steps = 0usize;
    let mut rejected_last = false;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(IntegrationError::StepUnderflow {
                time: t,
                step: h,
                partial: traj,
            });
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h < opts.h_min {
            return Err(IntegrationError::StepUnderflow {
                time: t,
                step: h,
                partial: traj,
            });
        }

        let err = match stages(field, &x, h, &mut k, &mut tmp, &mut x_new) {
            Ok(()) => error_norm(&x, &x_new, &k, h, opts),
            // A failed trial stage is treated as a rejection; only a failure at
            // an accepted point aborts.
            Err(_) => f64::INFINITY,
        };

        if err <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            if x_new.iter().any(|v| !v.is_finite()) {
                return Err(StepFailure::NonFinite.into_error(t, traj));
            }
            if t_new <= t {
                return Err(IntegrationError::StepUnderflow {
                    time: t,
                    step: h,
                    partial: traj,
                });
            }
            t = t_new;
            x.copy_from_slice(&x_new);
            traj.push(t, &x);
            // FSAL: the last stage is the derivative at the new point.
            k.swap(0, 6);
            let mut factor = 0.9 * err.max(1e-10).powf(-0.2);
            factor = factor.clamp(0.2, 5.0);
            if rejected_last {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(h_max);
            rejected_last = false;
        } else {
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h *= factor;
            rejected_last = true;
        }
    }
    Ok(traj)
}

fn stages<V: VectorField + ?Sized>(
    field: &V,
    x: &[f64],
    h: f64,
    k: &mut [Vec<f64>],
    tmp: &mut [f64],
    x_new: &mut [f64],
) -> Result<(), StepFailure> {
    let n = x.len();
    for i in 0..n {
        tmp[i] = x[i] + h * A21 * k[0][i];
    }
    eval_checked(field, tmp, &mut k[1])?;
    for i in 0..n {
        tmp[i] = x[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    eval_checked(field, tmp, &mut k[2])?;
    for i in 0..n {
        tmp[i] = x[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    eval_checked(field, tmp, &mut k[3])?;
    for i in 0..n {
        tmp[i] = x[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    eval_checked(field, tmp, &mut k[4])?;
    for i in 0..n {
        tmp[i] = x[i]
            + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    eval_checked(field, tmp, &mut k[5])?;
    for i in 0..n {
        x_new[i] = x[i]
            + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
    }
    // f(x_new) goes to slot 6 and moves to slot 0 on acceptance
    eval_checked(field, x_new, &mut k[6])
}

fn error_norm(x: &[f64], x_new: &[f64], k: &[Vec<f64>], h: f64, opts: &AdaptiveOptions) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let e = h
            * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                + E7 * k[6][i]);
        let scale = opts.atol + opts.rtol * x[i].abs().max(x_new[i].abs());
        worst = worst.max((e / scale).abs());
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

/// Starting step from the derivative scale (Hairer, Nørsett & Wanner).
fn initial_step<V: VectorField + ?Sized>(
    field: &V,
    x: &[f64],
    f0: &[f64],
    opts: &AdaptiveOptions,
    tmp: &mut [f64],
) -> Result<f64, StepFailure> {
    let scale: Vec<f64> = x.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let rms = |v: &[f64]| -> f64 {
        (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let d0 = rms(x);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    for i in 0..x.len() {
        tmp[i] = x[i] + h0 * f0[i];
    }
    let mut f1 = vec![0.0; x.len()];
    eval_checked(field, tmp, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odesim::FnField;
    use std::f64::consts::PI;

    #[test]
    fn rotation_with_tight_tolerance() {
        let f = FnField::new(2, |x: &[f64], dx: &mut [f64]| {
            dx[0] = x[1];
            dx[1] = -x[0];
        });
        let opts = AdaptiveOptions::new(1e-9, 1e-12);
        let tr = integrate_adaptive(&f, &[1.0, 0.0], 0.0, 2.0 * PI, &opts).unwrap();
        let x = tr.last_state().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-7 && x[1].abs() < 1e-7, "{x:?}");
        assert_eq!(tr.t_end(), Some(2.0 * PI));
    }

    #[test]
    fn exponential_decay() {
        let f = FnField::new(1, |x: &[f64], dx: &mut [f64]| dx[0] = -x[0]);
        let opts = AdaptiveOptions::new(1e-8, 1e-12);
        let tr = integrate_adaptive(&f, &[1.0], 0.0, 5.0, &opts).unwrap();
        let x = tr.last_state().unwrap()[0];
        assert!((x - (-5.0f64).exp()).abs() < 1e-9, "{x}");
    }

    #[test]
    fn empty_span_gives_single_sample() {
        let f = FnField::new(1, |x: &[f64], dx: &mut [f64]| dx[0] = -x[0]);
        let tr = integrate_adaptive(&f, &[1.0], 2.0, 2.0, &AdaptiveOptions::default()).unwrap();
        assert_eq!(tr.len(), 1);
    }

    #[test]
    fn finite_time_blowup_underflows() {
        // x' = x^2 from 1 escapes at t = 1
        let f = FnField::new(1, |x: &[f64], dx: &mut [f64]| dx[0] = x[0] * x[0]);
        let opts = AdaptiveOptions {
            h_min: 1e-10,
            ..AdaptiveOptions::new(1e-8, 1e-10)
        };
        let err = integrate_adaptive(&f, &[1.0], 0.0, 2.0, &opts).unwrap_err();
        let t = err.abort_time().unwrap();
        assert!(t < 1.0 && t > 0.99, "{t}");
    }
}
