//! Double integrator with linear stiffness and damping, driven to oscillate
//! with unit angular frequency in its position block.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::PlantKind;
use crate::design::{
    BundleMeta, ControlAffineSystem, Controller, DesignError, IandIBundle, ImmersionMap,
    ImplicitManifold, OrbitKind, SampleBox, TargetDynamics,
};

/// `ẋ_a = x_b`, `ẋ_b = −P x_a − R x_b + u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiParams {
    pub p: Matrix2<f64>,
    pub r: Matrix2<f64>,
}

impl Default for LtiParams {
    fn default() -> Self {
        Self {
            p: Matrix2::identity(),
            r: Matrix2::identity(),
        }
    }
}

fn rot() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

struct Lti {
    params: LtiParams,
}

fn split(x: &[f64]) -> (Vector2<f64>, Vector2<f64>) {
    (Vector2::new(x[0], x[1]), Vector2::new(x[2], x[3]))
}

fn stack(a: Vector2<f64>, b: Vector2<f64>) -> DVector<f64> {
    DVector::from_vec(vec![a[0], a[1], b[0], b[1]])
}

impl ControlAffineSystem for Lti {
    fn state_dim(&self) -> usize {
        4
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn drift(&self, x: &[f64]) -> DVector<f64> {
        let (xa, xb) = split(x);
        stack(xb, -self.params.p * xa - self.params.r * xb)
    }
    fn input_matrix(&self, _x: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(4, 2);
        g[(2, 0)] = 1.0;
        g[(3, 1)] = 1.0;
        g
    }
}

impl TargetDynamics for Lti {
    fn dim(&self) -> usize {
        2
    }
    fn alpha(&self, xi: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![xi[1], -xi[0]])
    }
    fn first_integral(&self, xi: &[f64]) -> Option<f64> {
        Some(0.5 * (xi[0] * xi[0] + xi[1] * xi[1]))
    }
    fn has_first_integral(&self) -> bool {
        true
    }
    fn orbit_kind(&self) -> OrbitKind {
        OrbitKind::FamilyOfOrbits
    }
}

impl ImmersionMap for Lti {
    fn pi(&self, xi: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![xi[0], xi[1], xi[1], -xi[0]])
    }
    fn jacobian(&self, _xi: &[f64]) -> DMatrix<f64> {
        // T = [I; J]
        DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0, -1.0, 0.0])
    }
}

impl ImplicitManifold for Lti {
    fn phi(&self, x: &[f64]) -> DVector<f64> {
        let (xa, xb) = split(x);
        let z = xb - rot() * xa;
        DVector::from_vec(vec![z[0], z[1]])
    }
    fn jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
        // [−J  I]
        DMatrix::from_row_slice(4 / 2, 4, &[0.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0])
    }
}

impl Controller for Lti {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        let (xa, xb) = split(x);
        let u = self.params.p * xa + (self.params.r + rot()) * xb - Vector2::new(z[0], z[1]);
        DVector::from_vec(vec![u[0], u[1]])
    }
}

/// Bundle with target `ξ̇ = Jξ`, `π = [I; J]ξ`, `φ = x_b − J x_a`, and
/// `v = P x_a + (R + J) x_b − z`, which gives `ż = −z`.
pub fn make_lti(params: LtiParams) -> Result<IandIBundle, DesignError> {
    if params.p.iter().chain(params.r.iter()).any(|v| !v.is_finite()) {
        return Err(DesignError::Constraint {
            inequality: "P, R finite".into(),
            detail: "matrix entries must be finite".into(),
        });
    }
    let design = Arc::new(Lti {
        params: params.clone(),
    });
    IandIBundle::new(
        "lti",
        design.clone(),
        design.clone(),
        design.clone(),
        design.clone(),
        design,
        SampleBox::symmetric(&[2.0, 2.0]),
        SampleBox::symmetric(&[2.0; 4]),
        BundleMeta {
            kind: PlantKind::Lti(params),
            angle_coords: vec![],
            target_coords: vec![0, 1],
            nominal_dt: 1e-3,
            nominal_period: 2.0 * PI,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{closed_loop_field, on_manifold_control};
    use crate::odesim::VectorField;

    #[test]
    fn control_on_manifold_is_k_times_x() {
        let params = LtiParams {
            p: Matrix2::new(2.0, 0.5, -0.3, 1.0),
            r: Matrix2::new(0.2, 0.0, 0.1, 0.7),
        };
        let b = make_lti(params.clone()).unwrap();
        let xi = [0.7, -1.1];
        let x = b.immersion.pi(&xi);
        // K = [P  R+J]
        let (xa, xb) = split(x.as_slice());
        let kx = params.p * xa + (params.r + rot()) * xb;
        let c = on_manifold_control(&b, &xi).unwrap();
        assert!((c[0] - kx[0]).abs() < 1e-12 && (c[1] - kx[1]).abs() < 1e-12);
        let u = b.control(x.as_slice());
        assert!((u[0] - kx[0]).abs() < 1e-12 && (u[1] - kx[1]).abs() < 1e-12);
    }

    #[test]
    fn closed_loop_is_linear_with_expected_matrix() {
        let b = make_lti(LtiParams::default()).unwrap();
        let f = closed_loop_field(&b);
        // A_cl = [[0, I], [J, J − I]]
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 1.0, -1.0, 1.0, //
                -1.0, 0.0, -1.0, -1.0,
            ],
        );
        for j in 0..4 {
            let mut e = [0.0; 4];
            e[j] = 1.0;
            let col = f.eval_vec(&e).unwrap();
            for i in 0..4 {
                assert!((col[i] - expect[(i, j)]).abs() < 1e-15);
            }
        }
    }
}
