//! Inertia wheel pendulum in normalized coordinates:
//! `ẋ₁ = x₃`, `ẋ₂ = x₄`, `ẋ₃ = m sin x₁ − b u`, `ẋ₄ = u`,
//! with `x₁ = 0` the upright link position.
//!
//! The target is the undamped pendulum `ξ̈₁ = −a sin ξ₁`, immersed linearly as
//! `π(ξ) = (ξ₁, kξ₁, ξ₂, kξ₂)`. Invariance forces `a = −m/(1 + bk)`; asking
//! for a center at the upright position (`a > 0`) gives the gain constraint
//! `k < −1/b`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{require_positive, PlantKind};
use crate::design::{
    BundleMeta, ControlAffineSystem, Controller, DesignError, IandIBundle, ImmersionMap,
    ImplicitManifold, OrbitKind, SampleBox, TargetDynamics,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwpParams {
    /// Normalized gravity torque.
    pub m: f64,
    /// Input coupling into the link acceleration.
    pub b: f64,
    /// Slope of the wheel angle on the manifold, `x₂ = k x₁`.
    pub k: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl IwpParams {
    /// Target stiffness `a = −m/(1 + bk)`.
    pub fn a(&self) -> f64 {
        -self.m / (1.0 + self.b * self.k)
    }

    pub fn check(&self) -> Result<(), DesignError> {
        require_positive("m", self.m)?;
        require_positive("b", self.b)?;
        require_positive("gamma1", self.gamma1)?;
        require_positive("gamma2", self.gamma2)?;
        if !(self.k < -1.0 / self.b) {
            return Err(DesignError::Constraint {
                inequality: "k < -1/b".into(),
                detail: format!(
                    "k = {} but -1/b = {}; the target stiffness a = -m/(1+bk) must be positive \
                     for the link to oscillate about the upright position",
                    self.k,
                    -1.0 / self.b
                ),
            });
        }
        Ok(())
    }
}

struct Iwp {
    params: IwpParams,
    a: f64,
}

impl ControlAffineSystem for Iwp {
    fn state_dim(&self) -> usize {
        4
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn drift(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![x[2], x[3], self.params.m * x[0].sin(), 0.0])
    }
    fn input_matrix(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(4, 1, &[0.0, 0.0, -self.params.b, 1.0])
    }
}

impl TargetDynamics for Iwp {
    fn dim(&self) -> usize {
        2
    }
    fn alpha(&self, xi: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![xi[1], -self.a * xi[0].sin()])
    }
    fn first_integral(&self, xi: &[f64]) -> Option<f64> {
        Some(0.5 * xi[1] * xi[1] - self.a * xi[0].cos())
    }
    fn has_first_integral(&self) -> bool {
        true
    }
    fn orbit_kind(&self) -> OrbitKind {
        OrbitKind::FamilyOfOrbits
    }
}

impl ImmersionMap for Iwp {
    fn pi(&self, xi: &[f64]) -> DVector<f64> {
        let k = self.params.k;
        DVector::from_vec(vec![xi[0], k * xi[0], xi[1], k * xi[1]])
    }
    fn jacobian(&self, _xi: &[f64]) -> DMatrix<f64> {
        let k = self.params.k;
        DMatrix::from_row_slice(4, 2, &[1.0, 0.0, k, 0.0, 0.0, 1.0, 0.0, k])
    }
}

impl ImplicitManifold for Iwp {
    fn phi(&self, x: &[f64]) -> DVector<f64> {
        let k = self.params.k;
        DVector::from_vec(vec![-k * x[0] + x[1], -k * x[2] + x[3]])
    }
    fn jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
        let k = self.params.k;
        DMatrix::from_row_slice(2, 4, &[-k, 1.0, 0.0, 0.0, 0.0, 0.0, -k, 1.0])
    }
}

impl Controller for Iwp {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        let IwpParams {
            m,
            b,
            k,
            gamma1,
            gamma2,
        } = self.params;
        let v = (-gamma1 * z[1] - gamma2 * z[0] + k * m * x[0].sin()) / (1.0 + k * b);
        DVector::from_element(1, v)
    }
}

/// Closed-form on-manifold input `c(π(ξ)) = −a k sin ξ₁`.
pub fn iwp_c(params: &IwpParams, xi: &[f64]) -> f64 {
    -params.a() * params.k * xi[0].sin()
}

/// Target energy `½ξ₂² − a cos ξ₁`.
pub fn iwp_energy(params: &IwpParams, xi1: f64, xi2: f64) -> f64 {
    0.5 * xi2 * xi2 - params.a() * xi1.cos()
}

/// Feedback `v = [−γ₁z₂ − γ₂z₁ + km sin x₁]/(1 + kb)`, which makes
/// `ż₁ = z₂`, `ż₂ = −γ₂z₁ − γ₁z₂`.
pub fn make_iwp(params: IwpParams) -> Result<IandIBundle, DesignError> {
    params.check()?;
    let a = params.a();
    let design = Arc::new(Iwp { params, a });
    IandIBundle::new(
        "iwp",
        design.clone(),
        design.clone(),
        design.clone(),
        design.clone(),
        design,
        SampleBox::symmetric(&[PI, 2.0]),
        SampleBox::symmetric(&[PI, PI, 2.0, 2.0]),
        BundleMeta {
            kind: PlantKind::Iwp(params),
            angle_coords: vec![0, 1],
            target_coords: vec![0, 2],
            nominal_dt: 1e-3,
            nominal_period: 2.0 * PI / a.sqrt(),
        },
    )
}
