//! Three-phase DC-AC converter with resistive load, in αβ coordinates.
//!
//! `x₁, x₂` are capacitor voltages and `x₃, x₄` inductor currents:
//! `ẋ₁,₂ = −x₁,₂/(RC) + x₃,₄/C`, `ẋ₃,₄ = −x₁,₂/L + (E/L)u₁,₂`.
//! The target is a Hopf-type oscillator whose circle `|ξ| = A` is the unique
//! attracting orbit, traversed with angular frequency `ω`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::{require_positive, PlantKind};
use crate::design::{
    BundleMeta, ControlAffineSystem, Controller, DesignError, IandIBundle, ImmersionMap,
    ImplicitManifold, OrbitKind, SampleBox, TargetDynamics,
};

/// Bound on each input component (duty ratio). Monitored, never enforced.
pub const SATURATION_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcAcParams {
    pub r: f64,
    pub c: f64,
    pub l: f64,
    pub e: f64,
    /// Target amplitude.
    pub amplitude: f64,
    /// Target angular frequency (rad/s).
    pub omega: f64,
    pub gamma: f64,
}

impl DcAcParams {
    pub fn check(&self) -> Result<(), DesignError> {
        require_positive("R", self.r)?;
        require_positive("C", self.c)?;
        require_positive("L", self.l)?;
        require_positive("E", self.e)?;
        require_positive("A", self.amplitude)?;
        require_positive("omega", self.omega)?;
        require_positive("gamma", self.gamma)
    }

    fn radial(&self, s: Vector2<f64>) -> f64 {
        s.norm_squared() - self.amplitude * self.amplitude
    }

    fn alpha(&self, s: Vector2<f64>) -> Vector2<f64> {
        let r = self.radial(s);
        Vector2::new(-r * s[0] + self.omega * s[1], -self.omega * s[0] - r * s[1])
    }

    /// Inductor currents that make the voltages follow the target,
    /// `β(s) = s/R + C·α(s)`.
    fn beta(&self, s: Vector2<f64>) -> Vector2<f64> {
        s / self.r + self.c * self.alpha(s)
    }

    fn beta_jacobian(&self, s: Vector2<f64>) -> Matrix2<f64> {
        let r = self.radial(s);
        let (c, w) = (self.c, self.omega);
        let g = 1.0 / self.r - c * r;
        Matrix2::new(
            g - 2.0 * c * s[0] * s[0],
            c * w - 2.0 * c * s[0] * s[1],
            -c * w - 2.0 * c * s[0] * s[1],
            g - 2.0 * c * s[1] * s[1],
        )
    }

    fn voltage_rate(&self, x: &[f64]) -> Vector2<f64> {
        Vector2::new(
            (x[2] - x[0] / self.r) / self.c,
            (x[3] - x[1] / self.r) / self.c,
        )
    }
}

/// Closed-form on-manifold input `(1/E)ξ + (L/E)·Dβ(ξ)·α(ξ)`.
pub fn dcac_c(params: &DcAcParams, xi: &[f64]) -> [f64; 2] {
    let s = Vector2::new(xi[0], xi[1]);
    let c = s / params.e + (params.l / params.e) * (params.beta_jacobian(s) * params.alpha(s));
    [c[0], c[1]]
}

struct DcAc {
    params: DcAcParams,
}

impl ControlAffineSystem for DcAc {
    fn state_dim(&self) -> usize {
        4
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn drift(&self, x: &[f64]) -> DVector<f64> {
        let p = &self.params;
        let v = p.voltage_rate(x);
        DVector::from_vec(vec![v[0], v[1], -x[0] / p.l, -x[1] / p.l])
    }
    fn input_matrix(&self, _x: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(4, 2);
        g[(2, 0)] = self.params.e / self.params.l;
        g[(3, 1)] = self.params.e / self.params.l;
        g
    }
}

impl TargetDynamics for DcAc {
    fn dim(&self) -> usize {
        2
    }
    fn alpha(&self, xi: &[f64]) -> DVector<f64> {
        let a = self.params.alpha(Vector2::new(xi[0], xi[1]));
        DVector::from_vec(vec![a[0], a[1]])
    }
    fn has_first_integral(&self) -> bool {
        false
    }
    fn orbit_kind(&self) -> OrbitKind {
        OrbitKind::UniqueAttractiveOrbit
    }
}

impl ImmersionMap for DcAc {
    fn pi(&self, xi: &[f64]) -> DVector<f64> {
        let b = self.params.beta(Vector2::new(xi[0], xi[1]));
        DVector::from_vec(vec![xi[0], xi[1], b[0], b[1]])
    }
    fn jacobian(&self, xi: &[f64]) -> DMatrix<f64> {
        let db = self.params.beta_jacobian(Vector2::new(xi[0], xi[1]));
        DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, db[(0, 0)], db[(0, 1)], db[(1, 0)], db[(1, 1)]])
    }
}

impl ImplicitManifold for DcAc {
    fn phi(&self, x: &[f64]) -> DVector<f64> {
        let b = self.params.beta(Vector2::new(x[0], x[1]));
        DVector::from_vec(vec![x[2] - b[0], x[3] - b[1]])
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let db = self.params.beta_jacobian(Vector2::new(x[0], x[1]));
        DMatrix::from_row_slice(
            2,
            4,
            &[-db[(0, 0)], -db[(0, 1)], 1.0, 0.0, -db[(1, 0)], -db[(1, 1)], 0.0, 1.0],
        )
    }
}

impl Controller for DcAc {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        let p = &self.params;
        let s = Vector2::new(x[0], x[1]);
        let v = s / p.e + (p.l / p.e) * (p.beta_jacobian(s) * p.voltage_rate(x))
            - p.gamma * Vector2::new(z[0], z[1]);
        DVector::from_vec(vec![v[0], v[1]])
    }
}

/// Feedback `v = (1/E)(x₁, x₂) + (L/E)·Dβ·F₀(x) − γz`, where `F₀` is the
/// voltage rate; it gives `ż = −(γE/L) z`.
pub fn make_dcac(params: DcAcParams) -> Result<IandIBundle, DesignError> {
    params.check()?;
    let design = Arc::new(DcAc { params });
    let a = params.amplitude;
    IandIBundle::new(
        "dcac",
        design.clone(),
        design.clone(),
        design.clone(),
        design.clone(),
        design,
        SampleBox::symmetric(&[a, a]),
        SampleBox::symmetric(&[a, a, 100.0, 100.0]),
        BundleMeta {
            kind: PlantKind::DcAc(params),
            angle_coords: vec![],
            target_coords: vec![0, 1],
            nominal_dt: 1e-6,
            nominal_period: 2.0 * PI / params.omega,
        },
    )
}
