use super::{IandIBundle, TargetDynamics};
use crate::odesim::{FieldError, VectorField};

/// `ẋ = f(x) + g(x)·v(x, φ(x))`.
pub struct ClosedLoopField<'a> {
    bundle: &'a IandIBundle,
}

pub fn closed_loop_field(bundle: &IandIBundle) -> ClosedLoopField<'_> {
    ClosedLoopField { bundle }
}

impl VectorField for ClosedLoopField<'_> {
    fn dimension(&self) -> usize {
        self.bundle.n()
    }

    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<(), FieldError> {
        let b = self.bundle;
        if x.len() != b.n() {
            return Err(FieldError::Dimension {
                expected: b.n(),
                got: x.len(),
            });
        }
        b.plant.admissible(x).map_err(FieldError::Inadmissible)?;
        let z = b.manifold.phi(x);
        b.controller
            .admissible(x, z.as_slice())
            .map_err(FieldError::Inadmissible)?;
        let u = b.controller.control(x, z.as_slice());
        let xdot = b.plant.drift(x) + b.plant.input_matrix(x) * u;
        dx.copy_from_slice(xdot.as_slice());
        Ok(())
    }
}

/// The pair `ẋ = f(x) + g(x)v(x, z)`, `ż = Dφ(x)·ẋ` on the stacked state `(x, z)`.
///
/// Started from `z(0) = φ(x(0))` it reproduces the closed loop, with `z(t)`
/// equal to `φ(x(t))`.
pub struct AugmentedField<'a> {
    bundle: &'a IandIBundle,
}

pub fn augmented_field(bundle: &IandIBundle) -> AugmentedField<'_> {
    AugmentedField { bundle }
}

impl AugmentedField<'_> {
    /// Stacks `x` with `z = φ(x)`, the intended initial condition.
    pub fn initial_state(&self, x0: &[f64]) -> Vec<f64> {
        let mut s = x0.to_vec();
        s.extend(self.bundle.manifold.phi(x0).iter());
        s
    }
}

impl VectorField for AugmentedField<'_> {
    fn dimension(&self) -> usize {
        2 * self.bundle.n() - self.bundle.p()
    }

    fn eval(&self, s: &[f64], ds: &mut [f64]) -> Result<(), FieldError> {
        let b = self.bundle;
        let n = b.n();
        if s.len() != self.dimension() {
            return Err(FieldError::Dimension {
                expected: self.dimension(),
                got: s.len(),
            });
        }
        let (x, z) = s.split_at(n);
        b.plant.admissible(x).map_err(FieldError::Inadmissible)?;
        b.controller.admissible(x, z).map_err(FieldError::Inadmissible)?;
        let u = b.controller.control(x, z);
        let xdot = b.plant.drift(x) + b.plant.input_matrix(x) * u;
        let zdot = b.manifold.jacobian(x) * &xdot;
        ds[..n].copy_from_slice(xdot.as_slice());
        ds[n..].copy_from_slice(zdot.as_slice());
        Ok(())
    }
}

/// The target oscillator `ξ̇ = α(ξ)` as an integrable field.
pub struct TargetField<'a> {
    target: &'a dyn TargetDynamics,
}

pub fn target_field(target: &dyn TargetDynamics) -> TargetField<'_> {
    TargetField { target }
}

impl VectorField for TargetField<'_> {
    fn dimension(&self) -> usize {
        self.target.dim()
    }

    fn eval(&self, xi: &[f64], dxi: &mut [f64]) -> Result<(), FieldError> {
        dxi.copy_from_slice(self.target.alpha(xi).as_slice());
        Ok(())
    }
}
