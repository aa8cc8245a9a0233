//! Initial-value-problem integration for autonomous vector fields.
//!
//! Two integrators are provided: classical fixed-step RK4 ([`integrate_fixed`]),
//! which is bitwise reproducible and is what the acceptance scenarios use, and
//! an embedded Dormand–Prince 5(4) pair ([`integrate_adaptive`]) for long
//! horizons. Both store every accepted step in a [`Trajectory`].
//!
//! Section crossings (for period measurement) are found by [`detect_crossings`]
//! and summarized by [`estimate_period`].

mod dopri;
mod events;
mod rk4;
mod trajectory;

pub use dopri::{integrate_adaptive, AdaptiveOptions};
pub use events::{default_min_separation, detect_crossings, estimate_period, SectionEvent};
pub use rk4::integrate_fixed;
pub use trajectory::Trajectory;

use thiserror::Error;

/// Why a vector field refused to evaluate at a state.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("state outside the admissible region: {0}")]
    Inadmissible(String),
    #[error("expected a state of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// An autonomous vector field `ẋ = F(x)`.
pub trait VectorField: Send + Sync {
    fn dimension(&self) -> usize;

    /// Writes `F(x)` into `dx`. Both slices have length [`dimension`](Self::dimension).
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<(), FieldError>;

    /// Convenience wrapper returning a fresh vector.
    fn eval_vec(&self, x: &[f64]) -> Result<Vec<f64>, FieldError> {
        let mut dx = vec![0.0; self.dimension()];
        self.eval(x, &mut dx)?;
        Ok(dx)
    }
}

impl<V: VectorField + ?Sized> VectorField for &V {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<(), FieldError> {
        (**self).eval(x, dx)
    }
}

impl<V: VectorField + ?Sized> VectorField for Box<V> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<(), FieldError> {
        (**self).eval(x, dx)
    }
}

/// A vector field built from a closure that cannot fail.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dimension(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<(), FieldError> {
        (self.f)(x, dx);
        Ok(())
    }
}

/// Which integrator to run, with its settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    Fixed { dt: f64 },
    Adaptive(AdaptiveOptions),
}

impl Integrator {
    pub fn integrate<V: VectorField + ?Sized>(
        &self,
        field: &V,
        x0: &[f64],
        t0: f64,
        t1: f64,
    ) -> Result<Trajectory, IntegrationError> {
        match self {
            Integrator::Fixed { dt } => integrate_fixed(field, x0, t0, t1, *dt),
            Integrator::Adaptive(opts) => integrate_adaptive(field, x0, t0, t1, opts),
        }
    }
}

/// Failure of an integration run. Every runtime variant carries the
/// trajectory accepted up to the failure.
#[derive(Debug, Clone, Error)]
pub enum IntegrationError {
    #[error("invalid integration request: {0}")]
    InvalidArgument(String),
    #[error("non-finite derivative at t = {time}")]
    NonFinite { time: f64, partial: Trajectory },
    #[error("vector field failed at t = {time}: {source}")]
    Field {
        time: f64,
        source: FieldError,
        partial: Trajectory,
    },
    #[error("step size {step:e} fell below the minimum at t = {time}")]
    StepUnderflow {
        time: f64,
        step: f64,
        partial: Trajectory,
    },
}

impl IntegrationError {
    /// Time at which a run stopped, if it got started at all.
    pub fn abort_time(&self) -> Option<f64> {
        match self {
            IntegrationError::InvalidArgument(_) => None,
            IntegrationError::NonFinite { time, .. }
            | IntegrationError::Field { time, .. }
            | IntegrationError::StepUnderflow { time, .. } => Some(*time),
        }
    }

    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            IntegrationError::InvalidArgument(_) => None,
            IntegrationError::NonFinite { partial, .. }
            | IntegrationError::Field { partial, .. }
            | IntegrationError::StepUnderflow { partial, .. } => Some(partial),
        }
    }

    pub fn into_partial(self) -> Option<Trajectory> {
        match self {
            IntegrationError::InvalidArgument(_) => None,
            IntegrationError::NonFinite { partial, .. }
            | IntegrationError::Field { partial, .. }
            | IntegrationError::StepUnderflow { partial, .. } => Some(partial),
        }
    }
}

/// Evaluates the field and rejects non-finite output.
pub(crate) fn eval_checked<V: VectorField + ?Sized>(
    field: &V,
    x: &[f64],
    dx: &mut [f64],
) -> Result<(), StepFailure> {
    field.eval(x, dx).map_err(StepFailure::Field)?;
    if dx.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StepFailure::NonFinite)
    }
}

pub(crate) enum StepFailure {
    Field(FieldError),
    NonFinite,
}

impl StepFailure {
    pub(crate) fn into_error(self, time: f64, partial: Trajectory) -> IntegrationError {
        match self {
            StepFailure::Field(source) => IntegrationError::Field {
                time,
                source,
                partial,
            },
            StepFailure::NonFinite => IntegrationError::NonFinite { time, partial },
        }
    }
}

pub(crate) fn check_request(
    dim: usize,
    x0: &[f64],
    t0: f64,
    t1: f64,
) -> Result<(), IntegrationError> {
    if x0.len() != dim {
        return Err(IntegrationError::InvalidArgument(format!(
            "initial state has {} entries, field dimension is {dim}",
            x0.len()
        )));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(IntegrationError::InvalidArgument(
            "time span must be finite".into(),
        ));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(IntegrationError::InvalidArgument(
            "initial state must be finite".into(),
        ));
    }
    Ok(())
}
