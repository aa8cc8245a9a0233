//! Cart-pendulum with a nonlinear immersion `x₂ = k(x₁)`.
//!
//! Choosing `k` to solve `1 + a₂ k′(s) cos s = −a` makes the on-manifold input
//! denominator the constant `−a`, so there is no singularity cone. The price is
//! a target with state-dependent inertia,
//! `ξ̇₂ = −(a₁/a) sin ξ₁ − ((1+a)/a) tan ξ₁ · ξ₂²`, defined for `|ξ₁| < π/2`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{require_positive, PlantKind};
use crate::design::{
    BundleMeta, ControlAffineSystem, Controller, DesignError, IandIBundle, ImmersionMap,
    ImplicitManifold, OrbitKind, SampleBox, TargetDynamics,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPendNonlinearParams {
    pub a1: f64,
    pub a2: f64,
    /// Design constant; the denominator of the on-manifold input is `−a`.
    pub a: f64,
    /// Cart position offset.
    pub a0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl CartPendNonlinearParams {
    pub fn check(&self) -> Result<(), DesignError> {
        require_positive("a1", self.a1)?;
        require_positive("a2", self.a2)?;
        require_positive("a", self.a)?;
        require_positive("gamma1", self.gamma1)?;
        require_positive("gamma2", self.gamma2)?;
        if !self.a0.is_finite() {
            return Err(DesignError::Constraint {
                inequality: "a0 finite".into(),
                detail: format!("a0 = {}", self.a0),
            });
        }
        Ok(())
    }

    pub fn shape(&self) -> NonlinearShape {
        NonlinearShape {
            a1: self.a1,
            a2: self.a2,
            a: self.a,
            a0: self.a0,
        }
    }
}

/// The manifold shape `k(s)` with its derivatives, and the target's inertia,
/// potential and energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearShape {
    pub a1: f64,
    pub a2: f64,
    pub a: f64,
    pub a0: f64,
}

impl NonlinearShape {
    /// `k(s) = −((1+a)/a₂) ln((1 + sin s)/cos s) + a₀`.
    pub fn k(&self, s: f64) -> f64 {
        -((1.0 + self.a) / self.a2) * ((1.0 + s.sin()) / s.cos()).ln() + self.a0
    }

    /// `k′(s) = −(1+a)/(a₂ cos s)`.
    pub fn dk(&self, s: f64) -> f64 {
        -(1.0 + self.a) / (self.a2 * s.cos())
    }

    /// `k″(s) = −(1+a) sin s/(a₂ cos² s)`.
    pub fn ddk(&self, s: f64) -> f64 {
        let c = s.cos();
        -(1.0 + self.a) * s.sin() / (self.a2 * c * c)
    }

    /// `m(s) = |cos s|^{−2(1+1/a)}`.
    pub fn inertia(&self, s: f64) -> f64 {
        s.cos().abs().powf(-2.0 * (1.0 + 1.0 / self.a))
    }

    /// `U(s) = (a₁/(a+2)) cos(s)^{−(1+2/a)}`.
    pub fn potential(&self, s: f64) -> f64 {
        self.a1 / (self.a + 2.0) * s.cos().powf(-(1.0 + 2.0 / self.a))
    }

    /// `H(ξ) = ½m(ξ₁)ξ₂² + U(ξ₁)`.
    pub fn energy(&self, xi1: f64, xi2: f64) -> f64 {
        0.5 * self.inertia(xi1) * xi2 * xi2 + self.potential(xi1)
    }

    /// `ξ̇₂` of the target.
    pub fn alpha2(&self, xi1: f64, xi2: f64) -> f64 {
        -(self.a1 / self.a) * xi1.sin() - ((1.0 + self.a) / self.a) * xi1.tan() * xi2 * xi2
    }

    /// `1 + a₂ k′(s) cos s + a`, zero by construction.
    pub fn ode_residual(&self, s: f64) -> f64 {
        1.0 + self.a2 * self.dk(s) * s.cos() + self.a
    }
}

/// Closed-form on-manifold input `(k″ξ₂² + a₁k′ sin ξ₁)/(−a)`.
pub fn cartpend_nonlinear_c(params: &CartPendNonlinearParams, xi: &[f64]) -> f64 {
    let s = params.shape();
    (s.ddk(xi[0]) * xi[1] * xi[1] + params.a1 * s.dk(xi[0]) * xi[0].sin()) / (-params.a)
}

struct CartPendNonlinear {
    params: CartPendNonlinearParams,
    shape: NonlinearShape,
}

impl ControlAffineSystem for CartPendNonlinear {
    fn state_dim(&self) -> usize {
        4
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn drift(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![x[2], x[3], self.params.a1 * x[0].sin(), 0.0])
    }
    fn input_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(4, 1, &[0.0, 0.0, -self.params.a2 * x[0].cos(), 1.0])
    }
    fn admissible(&self, x: &[f64]) -> Result<(), String> {
        if x[0].abs() < FRAC_PI_2 {
            Ok(())
        } else {
            Err(format!("|x1| = {} reaches pi/2 where k(x1) is undefined", x[0].abs()))
        }
    }
}

impl TargetDynamics for CartPendNonlinear {
    fn dim(&self) -> usize {
        2
    }
    fn alpha(&self, xi: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![xi[1], self.shape.alpha2(xi[0], xi[1])])
    }
    fn first_integral(&self, xi: &[f64]) -> Option<f64> {
        (xi[0].abs() < FRAC_PI_2).then(|| self.shape.energy(xi[0], xi[1]))
    }
    fn has_first_integral(&self) -> bool {
        true
    }
    fn orbit_kind(&self) -> OrbitKind {
        OrbitKind::FamilyOfOrbits
    }
}

impl ImmersionMap for CartPendNonlinear {
    fn pi(&self, xi: &[f64]) -> DVector<f64> {
        let s = &self.shape;
        DVector::from_vec(vec![xi[0], s.k(xi[0]), xi[1], s.dk(xi[0]) * xi[1]])
    }
    fn jacobian(&self, xi: &[f64]) -> DMatrix<f64> {
        let s = &self.shape;
        let dk = s.dk(xi[0]);
        DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 0.0, dk, 0.0, 0.0, 1.0, s.ddk(xi[0]) * xi[1], dk],
        )
    }
}

impl ImplicitManifold for CartPendNonlinear {
    fn phi(&self, x: &[f64]) -> DVector<f64> {
        let s = &self.shape;
        DVector::from_vec(vec![x[1] - s.k(x[0]), x[3] - s.dk(x[0]) * x[2]])
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let s = &self.shape;
        let dk = s.dk(x[0]);
        DMatrix::from_row_slice(
            2,
            4,
            &[-dk, 1.0, 0.0, 0.0, -s.ddk(x[0]) * x[2], 0.0, -dk, 1.0],
        )
    }
}

impl Controller for CartPendNonlinear {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        let p = &self.params;
        let s = &self.shape;
        let v = -(s.ddk(x[0]) * x[2] * x[2] + p.a1 * s.dk(x[0]) * x[0].sin()
            - p.gamma2 * z[0]
            - p.gamma1 * z[1])
            / p.a;
        DVector::from_element(1, v)
    }
}

/// Feedback `v = −(1/a)(k″x₃² + a₁k′ sin x₁ − γ₂z₁ − γ₁z₂)`, giving
/// `ż₁ = z₂`, `ż₂ = −γ₂z₁ − γ₁z₂`.
pub fn make_cartpend_nonlinear(params: CartPendNonlinearParams) -> Result<IandIBundle, DesignError> {
    params.check()?;
    let shape = params.shape();
    let omega0 = (params.a1 / params.a).sqrt();
    let design = Arc::new(CartPendNonlinear { params, shape });
    let edge = FRAC_PI_2 - 0.05;
    IandIBundle::new(
        "cartpend-nonlinear",
        design.clone(),
        design.clone(),
        design.clone(),
        design.clone(),
        design,
        SampleBox::symmetric(&[edge, 2.0]),
        SampleBox::symmetric(&[edge, 5.0, 2.0, 5.0]),
        BundleMeta {
            kind: PlantKind::CartPendNonlinear(params),
            angle_coords: vec![0],
            target_coords: vec![0, 2],
            nominal_dt: 1e-3,
            nominal_period: 2.0 * std::f64::consts::PI / omega0,
        },
    )
}
