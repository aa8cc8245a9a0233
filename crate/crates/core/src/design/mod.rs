//! The orbital immersion-and-invariance construction.
//!
//! A design is a control-affine plant `ẋ = f(x) + g(x)u` together with
//!
//! * a target oscillator `ξ̇ = α(ξ)` of lower dimension `p`,
//! * an immersion `x = π(ξ)` whose image is the manifold to be made invariant,
//! * an implicit description `φ(x) = 0` of the same manifold, and
//! * a feedback `v(x, z)` acting on the off-the-manifold coordinate `z = φ(x)`.
//!
//! The design is correct when three identities hold: the projected
//! invariance (FBI) equation `g⊥(π)[f(π) − Dπ·α] = 0`, the composition
//! `φ(π(ξ)) = 0`, and the boundary condition `v(π(ξ), 0) = c(π(ξ))`, where
//! `c` is the least-squares input keeping the state on the manifold. If in
//! addition `z → 0` with bounded trajectories, the closed loop
//! `ẋ = f(x) + g(x)v(x, φ(x))` converges to the image under `π` of one of the
//! target's periodic orbits.
//!
//! [`IandIBundle`] packages one such design. The residual functions in this
//! module evaluate each identity at a point; [`validate_bundle`] sweeps them
//! over a seeded random grid.

mod fields;
mod validate;

pub use fields::{
    augmented_field, closed_loop_field, target_field, AugmentedField, ClosedLoopField, TargetField,
};
pub use validate::{validate_bundle, validate_bundle_with, Tolerances, ValidationReport};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{left_annihilator, pseudo_solve, RankError};
use crate::plants::PlantKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("{0}")]
    Inadmissible(String),
    #[error("input matrix: {0}")]
    Rank(#[from] RankError),
    #[error("parameter constraint violated: {inequality} ({detail})")]
    Constraint { inequality: String, detail: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operation needs a {expected} bundle, got `{got}`")]
    WrongKind { expected: &'static str, got: String },
}

/// Plant `ẋ = f(x) + g(x)u` with `m < n` inputs.
pub trait ControlAffineSystem: Send + Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn drift(&self, x: &[f64]) -> DVector<f64>;
    /// `n×m` input matrix.
    fn input_matrix(&self, x: &[f64]) -> DMatrix<f64>;
    /// `Err` names the violated condition when `x` lies in an excluded set.
    fn admissible(&self, _x: &[f64]) -> Result<(), String> {
        Ok(())
    }
}

/// Whether the target has a continuum of periodic orbits (selected by the
/// initial condition) or a single attracting one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    FamilyOfOrbits,
    UniqueAttractiveOrbit,
}

/// Target oscillator `ξ̇ = α(ξ)`.
pub trait TargetDynamics: Send + Sync {
    fn dim(&self) -> usize;
    fn alpha(&self, xi: &[f64]) -> DVector<f64>;
    /// Conserved energy, when the target has one.
    fn first_integral(&self, _xi: &[f64]) -> Option<f64> {
        None
    }
    fn has_first_integral(&self) -> bool;
    fn orbit_kind(&self) -> OrbitKind;
}

/// Immersion `π: ℝᵖ → ℝⁿ` and its `n×p` Jacobian.
pub trait ImmersionMap: Send + Sync {
    fn pi(&self, xi: &[f64]) -> DVector<f64>;
    fn jacobian(&self, xi: &[f64]) -> DMatrix<f64>;
}

/// Implicit manifold map `φ: ℝⁿ → ℝⁿ⁻ᵖ` and its `(n−p)×n` Jacobian.
pub trait ImplicitManifold: Send + Sync {
    fn phi(&self, x: &[f64]) -> DVector<f64>;
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
}

/// Feedback `v(x, z)`.
pub trait Controller: Send + Sync {
    fn control(&self, x: &[f64], z: &[f64]) -> DVector<f64>;
    fn admissible(&self, _x: &[f64], _z: &[f64]) -> Result<(), String> {
        Ok(())
    }
}

/// Axis-aligned box used to draw residual sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SampleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(a, b)| a <= b));
        Self { lower, upper }
    }

    pub fn symmetric(half_widths: &[f64]) -> Self {
        Self::new(half_widths.iter().map(|h| -h).collect(), half_widths.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

/// Plant-level facts the generic machinery needs for metrics and plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleMeta {
    pub kind: PlantKind,
    /// Coordinates of `x` that live on the circle.
    pub angle_coords: Vec<usize>,
    /// Coordinates of `x` that reproduce `ξ` on the manifold (`ξ = x[target_coords]`).
    pub target_coords: Vec<usize>,
    /// Step size that resolves the fastest closed-loop time scale with RK4.
    pub nominal_dt: f64,
    /// Rough oscillation period of the target, used to size search horizons.
    pub nominal_period: f64,
}

/// One complete orbital I&I design.
#[derive(Clone)]
pub struct IandIBundle {
    pub name: String,
    pub plant: Arc<dyn ControlAffineSystem>,
    pub target: Arc<dyn TargetDynamics>,
    pub immersion: Arc<dyn ImmersionMap>,
    pub manifold: Arc<dyn ImplicitManifold>,
    pub controller: Arc<dyn Controller>,
    pub xi_sample_box: SampleBox,
    pub x_sample_box: SampleBox,
    pub meta: BundleMeta,
}

impl std::fmt::Debug for IandIBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IandIBundle")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("m", &self.m())
            .field("p", &self.p())
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

impl IandIBundle {
    /// Checks the dimensional consistency of the parts at the box centers.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        plant: Arc<dyn ControlAffineSystem>,
        target: Arc<dyn TargetDynamics>,
        immersion: Arc<dyn ImmersionMap>,
        manifold: Arc<dyn ImplicitManifold>,
        controller: Arc<dyn Controller>,
        xi_sample_box: SampleBox,
        x_sample_box: SampleBox,
        meta: BundleMeta,
    ) -> Result<Self, DesignError> {
        let bundle = Self {
            name: name.into(),
            plant,
            target,
            immersion,
            manifold,
            controller,
            xi_sample_box,
            x_sample_box,
            meta,
        };
        bundle.check_dimensions()?;
        Ok(bundle)
    }

    fn check_dimensions(&self) -> Result<(), DesignError> {
        let (n, m, p) = (self.n(), self.m(), self.p());
        let dim_err = |what: String| Err(DesignError::Dimension(what));
        if !(m < n && p < n && m > 0 && p > 0) {
            return dim_err(format!("need 0 < m < n and 0 < p < n, got n={n} m={m} p={p}"));
        }
        if self.xi_sample_box.dim() != p || self.x_sample_box.dim() != n {
            return dim_err("sample boxes do not match p and n".into());
        }
        if self.meta.target_coords.len() != p {
            return dim_err("target_coords must list p coordinates".into());
        }
        let xi = box_center(&self.xi_sample_box);
        let x = box_center(&self.x_sample_box);
        let z = vec![0.0; n - p];
        let checks = [
            ("alpha", self.target.alpha(&xi).len(), p),
            ("pi", self.immersion.pi(&xi).len(), n),
            ("phi", self.manifold.phi(&x).len(), n - p),
            ("v", self.controller.control(&x, &z).len(), m),
            ("f", self.plant.drift(&x).len(), n),
        ];
        for (what, got, want) in checks {
            if got != want {
                return dim_err(format!("{what} returns {got} entries, expected {want}"));
            }
        }
        let g = self.plant.input_matrix(&x);
        if g.shape() != (n, m) {
            return dim_err(format!("g is {:?}, expected ({n}, {m})", g.shape()));
        }
        if self.immersion.jacobian(&xi).shape() != (n, p) {
            return dim_err("immersion Jacobian must be n×p".into());
        }
        if self.manifold.jacobian(&x).shape() != (n - p, n) {
            return dim_err("manifold Jacobian must be (n−p)×n".into());
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.plant.state_dim()
    }

    pub fn m(&self) -> usize {
        self.plant.input_dim()
    }

    pub fn p(&self) -> usize {
        self.target.dim()
    }

    /// Off-the-manifold coordinate `z = φ(x)`.
    pub fn off_manifold(&self, x: &[f64]) -> DVector<f64> {
        self.manifold.phi(x)
    }

    /// Closed-loop input `u = v(x, φ(x))`.
    pub fn control(&self, x: &[f64]) -> DVector<f64> {
        let z = self.manifold.phi(x);
        self.controller.control(x, z.as_slice())
    }

    /// `ξ`-coordinates read off a state (exact on the manifold).
    pub fn project_to_target(&self, x: &[f64]) -> Vec<f64> {
        self.meta.target_coords.iter().map(|&c| x[c]).collect()
    }

    /// Target energy evaluated at the projection of `x`.
    pub fn target_energy_at(&self, x: &[f64]) -> Option<f64> {
        self.target.first_integral(&self.project_to_target(x))
    }

    fn lifted(&self, xi: &[f64]) -> Result<DVector<f64>, DesignError> {
        let x = self.immersion.pi(xi);
        self.plant
            .admissible(x.as_slice())
            .map_err(|why| DesignError::Inadmissible(format!("π(ξ) is inadmissible: {why}")))?;
        Ok(x)
    }

    /// Velocity mismatch `Dπ(ξ)·α(ξ) − f(π(ξ))` that the input has to supply.
    fn manifold_velocity_gap(&self, xi: &[f64], x: &DVector<f64>) -> DVector<f64> {
        self.immersion.jacobian(xi) * self.target.alpha(xi) - self.plant.drift(x.as_slice())
    }
}

fn box_center(b: &SampleBox) -> Vec<f64> {
    b.lower.iter().zip(&b.upper).map(|(a, c)| 0.5 * (a + c)).collect()
}

/// Projected invariance residual `g⊥(π(ξ))·[f(π(ξ)) − Dπ(ξ)·α(ξ)]`, with
/// `g⊥` from [`left_annihilator`].
pub fn fbi_residual(bundle: &IandIBundle, xi: &[f64]) -> Result<DVector<f64>, DesignError> {
    let x = bundle.lifted(xi)?;
    let g = bundle.plant.input_matrix(x.as_slice());
    let annihilator = left_annihilator(&g)?;
    Ok(-(annihilator * bundle.manifold_velocity_gap(xi, &x)))
}

/// On-manifold input `c(π(ξ)) = (gᵀg)⁻¹gᵀ[Dπ(ξ)·α(ξ) − f(π(ξ))]`.
pub fn on_manifold_control(bundle: &IandIBundle, xi: &[f64]) -> Result<DVector<f64>, DesignError> {
    let x = bundle.lifted(xi)?;
    let g = bundle.plant.input_matrix(x.as_slice());
    Ok(pseudo_solve(&g, &bundle.manifold_velocity_gap(xi, &x))?)
}

/// Boundary-condition residual `v(π(ξ), 0) − c(π(ξ))`.
pub fn constraint_residual(bundle: &IandIBundle, xi: &[f64]) -> Result<DVector<f64>, DesignError> {
    let c = on_manifold_control(bundle, xi)?;
    let x = bundle.immersion.pi(xi);
    let z = vec![0.0; bundle.n() - bundle.p()];
    bundle
        .controller
        .admissible(x.as_slice(), &z)
        .map_err(DesignError::Inadmissible)?;
    Ok(bundle.controller.control(x.as_slice(), &z) - c)
}

/// `φ(π(ξ))`; zero when the image of `π` lies in the zero set of `φ`.
pub fn manifold_residual(bundle: &IandIBundle, xi: &[f64]) -> DVector<f64> {
    bundle.manifold.phi(bundle.immersion.pi(xi).as_slice())
}

/// Set identity `ker Φ = im T` for linear maps `x = Tξ`, `z = Φx`: holds iff
/// `ΦT = 0` and `rank T + rank Φ = n`.
pub fn linear_set_identity_holds(t: &DMatrix<f64>, phi: &DMatrix<f64>, tol: f64) -> bool {
    let n = t.nrows();
    if phi.ncols() != n {
        return false;
    }
    let rank = |m: &DMatrix<f64>| m.singular_values().iter().filter(|s| **s > tol).count();
    (phi * t).amax() <= tol && rank(t) + rank(phi) == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn linear_identity_detects_gap() {
        let t = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
        let phi = dmatrix![0.0, 0.0, 1.0];
        assert!(linear_set_identity_holds(&t, &phi, 1e-12));
        // zero set of phi_short is 2-dimensional but im t is 1-dimensional
        let t_short = dmatrix![1.0; 0.0; 0.0];
        assert!(!linear_set_identity_holds(&t_short, &phi, 1e-12));
    }
}
