use super::{check_request, eval_checked, IntegrationError, StepFailure, Trajectory, VectorField};

/// Classical fourth-order Runge–Kutta on a uniform grid `t0, t0+dt, …`.
///
/// The final step is shortened so the last sample lands on `t1` exactly.
/// Grid times are computed as `t0 + i·dt` rather than accumulated, so runs are
/// bitwise reproducible. A non-finite derivative or a field error aborts the
/// run; the error carries everything accepted so far.
pub fn integrate_fixed<V: VectorField + ?Sized>(
    field: &V,
    x0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory, IntegrationError> {
    let n = field.dimension();
    check_request(n, x0, t0, t1)?;
    if !(t1 > t0) {
        return Err(IntegrationError::InvalidArgument(format!(
            "t1 = {t1} must exceed t0 = {t0}"
        )));
    }
    if !(dt > 0.0 && dt <= (t1 - t0) * (1.0 + 1e-12)) {
        return Err(IntegrationError::InvalidArgument(format!(
            "step {dt} must be positive and no larger than the span {}",
            t1 - t0
        )));
    }

    let steps_hint = ((t1 - t0) / dt).ceil() as usize + 1;
    let mut traj = Trajectory::with_capacity(n, steps_hint);
    traj.push(t0, x0);

    let mut x = x0.to_vec();
    let mut stage = Stages::new(n);
    let mut t = t0;
    let mut i: u64 = 0;
    loop {
        i += 1;
        let mut t_next = t0 + i as f64 * dt;
        let last = t_next >= t1 - 1e-9 * dt;
        if last {
            t_next = t1;
        }
        let h = t_next - t;
        if let Err(failure) = stage.step(field, &mut x, h) {
            return Err(failure.into_error(t, traj));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(StepFailure::NonFinite.into_error(t, traj));
        }
        traj.push(t_next, &x);
        t = t_next;
        if last {
            return Ok(traj);
        }
    }
}

struct Stages {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn step<V: VectorField + ?Sized>(
        &mut self,
        field: &V,
        x: &mut [f64],
        h: f64,
    ) -> Result<(), StepFailure> {
        eval_checked(field, x, &mut self.k1)?;
        axpy(&mut self.tmp, x, 0.5 * h, &self.k1);
        eval_checked(field, &self.tmp, &mut self.k2)?;
        axpy(&mut self.tmp, x, 0.5 * h, &self.k2);
        eval_checked(field, &self.tmp, &mut self.k3)?;
        axpy(&mut self.tmp, x, h, &self.k3);
        eval_checked(field, &self.tmp, &mut self.k4)?;
        let h6 = h / 6.0;
        for j in 0..x.len() {
            x[j] += h6 * (self.k1[j] + 2.0 * self.k2[j] + 2.0 * self.k3[j] + self.k4[j]);
        }
        Ok(())
    }
}

fn axpy(out: &mut [f64], x: &[f64], a: f64, k: &[f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}
