//! Cart-pendulum with a linear immersion.
//!
//! Plant (pendulum angle `x₁`, cart position `x₂`, acceleration input):
//! `ẋ₃ = a₁ sin x₁ − a₂ cos x₁ u`, `ẋ₄ = u`. The immersion
//! `π(ξ) = (ξ₁, kξ₁, ξ₂, kξ₂)` forces the target
//! `ξ̈₁ = α₂(ξ₁) = a₁ sin ξ₁ / (1 + k a₂ cos ξ₁)`, which has a center at the
//! origin when `k < −1/a₂`. The controller is singular where
//! `1 + k a₂ cos x₁ = 0`, so the admissible set is the cone
//! `cos x₁ > −1/(k a₂)`, that is `|x₁| < β*` with `β* = arccos(−1/(k a₂))`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{require_positive, PlantKind};
use crate::design::{
    BundleMeta, ControlAffineSystem, Controller, DesignError, IandIBundle, ImmersionMap,
    ImplicitManifold, OrbitKind, SampleBox, TargetDynamics,
};
use crate::quadrature::{adaptive_simpson, HermiteTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPendLinearParams {
    pub a1: f64,
    pub a2: f64,
    pub k: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl CartPendLinearParams {
    pub fn check(&self) -> Result<(), DesignError> {
        require_positive("a1", self.a1)?;
        require_positive("a2", self.a2)?;
        require_positive("gamma1", self.gamma1)?;
        require_positive("gamma2", self.gamma2)?;
        if !(self.k < -1.0 / self.a2) {
            return Err(DesignError::Constraint {
                inequality: "k < -1/a2".into(),
                detail: format!(
                    "k = {} but -1/a2 = {}; the target needs a center at the upright position",
                    self.k,
                    -1.0 / self.a2
                ),
            });
        }
        Ok(())
    }

    /// Half-width of the admissible cone, `arccos(−1/(k a₂))`.
    pub fn beta_star(&self) -> f64 {
        (-1.0 / (self.k * self.a2)).acos()
    }

    fn denominator(&self, x1: f64) -> f64 {
        1.0 + self.k * self.a2 * x1.cos()
    }

    fn cone_check(&self, x1: f64) -> Result<(), String> {
        if self.denominator(x1) < 0.0 {
            Ok(())
        } else {
            Err(format!(
                "x1 = {x1} leaves the cone cos(x1) > -1/(k a2) (|x1| < {})",
                self.beta_star()
            ))
        }
    }
}

/// `α₂(ξ₁) = a₁ sin ξ₁ / (1 + k a₂ cos ξ₁)`.
pub fn cartpend_linear_alpha2(params: &CartPendLinearParams, xi1: f64) -> f64 {
    params.a1 * xi1.sin() / params.denominator(xi1)
}

/// Closed-form on-manifold input `k a₁ sin ξ₁ / (1 + k a₂ cos ξ₁)`.
pub fn cartpend_linear_c(params: &CartPendLinearParams, xi: &[f64]) -> f64 {
    params.k * params.a1 * xi[0].sin() / params.denominator(xi[0])
}

/// `U(ξ₁) = −∫₀^{ξ₁} α₂(s) ds` by adaptive quadrature. `None` outside the cone.
pub fn cartpend_linear_potential(params: &CartPendLinearParams, xi1: f64) -> Option<f64> {
    if params.cone_check(xi1).is_err() {
        return None;
    }
    Some(-adaptive_simpson(|s| cartpend_linear_alpha2(params, s), 0.0, xi1, 1e-13))
}

/// `|1 + k a₂ cos x₁|`, the distance of the control denominator from zero.
pub fn cartpend_singularity_margin(bundle: &IandIBundle, x: &[f64]) -> Result<f64, DesignError> {
    match &bundle.meta.kind {
        PlantKind::CartPendLinear(p) => Ok(p.denominator(x[0]).abs()),
        other => Err(DesignError::WrongKind {
            expected: "cartpend-linear",
            got: other.label().to_string(),
        }),
    }
}

const TABLE_NODES: usize = 1025;
const TABLE_FRACTION: f64 = 0.95;

struct CartPendLinear {
    params: CartPendLinearParams,
    // U on [0, 0.95 β*]; U is even.
    potential: HermiteTable,
}

impl CartPendLinear {
    fn new(params: CartPendLinearParams) -> Self {
        let hi = TABLE_FRACTION * params.beta_star();
        let potential = HermiteTable::antiderivative(
            |s| -cartpend_linear_alpha2(&params, s),
            0.0,
            hi,
            TABLE_NODES,
            1e-14,
        );
        Self { params, potential }
    }

    fn potential(&self, xi1: f64) -> Option<f64> {
        self.params.cone_check(xi1).ok()?;
        self.potential
            .eval(xi1.abs())
            .or_else(|| cartpend_linear_potential(&self.params, xi1))
    }
}

impl ControlAffineSystem for CartPendLinear {
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
}

impl TargetDynamics for CartPendLinear {
    fn dim(&self) -> usize {
        2
    }
    fn alpha(&self, xi: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![xi[1], cartpend_linear_alpha2(&self.params, xi[0])])
    }
    fn first_integral(&self, xi: &[f64]) -> Option<f64> {
        Some(0.5 * xi[1] * xi[1] + self.potential(xi[0])?)
    }
    fn has_first_integral(&self) -> bool {
        true
    }
    fn orbit_kind(&self) -> OrbitKind {
        OrbitKind::FamilyOfOrbits
    }
}

impl ImmersionMap for CartPendLinear {
    fn pi(&self, xi: &[f64]) -> DVector<f64> {
        let k = self.params.k;
        DVector::from_vec(vec![xi[0], k * xi[0], xi[1], k * xi[1]])
    }
    fn jacobian(&self, _xi: &[f64]) -> DMatrix<f64> {
        let k = self.params.k;
        DMatrix::from_row_slice(4, 2, &[1.0, 0.0, k, 0.0, 0.0, 1.0, 0.0, k])
    }
}

impl ImplicitManifold for CartPendLinear {
    fn phi(&self, x: &[f64]) -> DVector<f64> {
        let k = self.params.k;
        DVector::from_vec(vec![x[1] - k * x[0], x[3] - k * x[2]])
    }
    fn jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
        let k = self.params.k;
        DMatrix::from_row_slice(2, 4, &[-k, 1.0, 0.0, 0.0, 0.0, 0.0, -k, 1.0])
    }
}

impl Controller for CartPendLinear {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        let p = &self.params;
        let v = (-p.gamma1 * z[1] - p.gamma2 * z[0] + p.k * p.a1 * x[0].sin()) / p.denominator(x[0]);
        DVector::from_element(1, v)
    }
    fn admissible(&self, x: &[f64], _z: &[f64]) -> Result<(), String> {
        self.params.cone_check(x[0])
    }
}

/// Feedback `v = [−γ₁z₂ − γ₂z₁ + k a₁ sin x₁]/(1 + k a₂ cos x₁)`, giving
/// `ż₁ = z₂`, `ż₂ = −γ₂z₁ − γ₁z₂` inside the cone.
pub fn make_cartpend_linear(params: CartPendLinearParams) -> Result<IandIBundle, DesignError> {
    params.check()?;
    let beta = params.beta_star();
    let omega0 = (params.a1 / (-1.0 - params.k * params.a2)).sqrt();
    let design = Arc::new(CartPendLinear::new(params));
    let inner = beta - 0.01;
    IandIBundle::new(
        "cartpend-linear",
        design.clone(),
        design.clone(),
        design.clone(),
        design.clone(),
        design,
        SampleBox::symmetric(&[inner, 2.0]),
        SampleBox::symmetric(&[inner, 5.0, 2.0, 5.0]),
        BundleMeta {
            kind: PlantKind::CartPendLinear(params),
            angle_coords: vec![0],
            target_coords: vec![0, 2],
            nominal_dt: 1e-3,
            nominal_period: 2.0 * std::f64::consts::PI / omega0,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> CartPendLinearParams {
        CartPendLinearParams {
            a1: 9.8,
            a2: 1.0,
            k: -4.0,
            gamma1: 2.0,
            gamma2: 2.0,
        }
    }

    #[test]
    fn cone_half_width() {
        assert!((defaults().beta_star() - 0.25f64.acos()).abs() < 1e-15);
        assert!((defaults().beta_star() - 1.318116).abs() < 1e-6);
    }

    #[test]
    fn slope_at_origin_is_negative() {
        let p = defaults();
        let h = 1e-6;
        let slope = (cartpend_linear_alpha2(&p, h) - cartpend_linear_alpha2(&p, -h)) / (2.0 * h);
        assert!((slope + 9.8 / 3.0).abs() < 1e-8);
        assert_eq!(cartpend_linear_alpha2(&p, 0.0), 0.0);
        assert_eq!(cartpend_linear_c(&p, &[0.0, 0.3]), 0.0);
    }

    #[test]
    fn margin_values() {
        let b = make_cartpend_linear(defaults()).unwrap();
        let m = |x1: f64| cartpend_singularity_margin(&b, &[x1, 0.0, 0.0, 0.0]).unwrap();
        assert!((m(0.0) - 3.0).abs() < 1e-15);
        assert!(m(defaults().beta_star()) < 1e-12);
        assert!((m(std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_potential_matches_log_form() {
        let p = defaults();
        let d = CartPendLinear::new(p);
        let ka2 = p.k * p.a2;
        let exact = |s: f64| (p.a1 / ka2) * ((1.0 + ka2 * s.cos()).abs().ln() - (1.0 + ka2).abs().ln());
        for s in [-1.3, -1.2, -0.7, 0.0, 0.01, 0.4, 1.1, 1.25, 1.31] {
            let got = d.potential(s).unwrap();
            assert!((got - exact(s)).abs() < 1e-9 * (1.0 + exact(s).abs()), "s = {s}");
        }
        assert!(d.potential(1.4).is_none());
    }

    #[test]
    fn constraint_names_inequality() {
        let err = make_cartpend_linear(CartPendLinearParams { k: -0.5, ..defaults() }).unwrap_err();
        assert!(err.to_string().contains("k < -1/a2"));
    }
}
