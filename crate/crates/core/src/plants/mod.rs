//! The worked designs: a linear oscillator, the inertia wheel pendulum, two
//! cart-pendulum controllers, and a DC-AC converter.
//!
//! Every constructor checks its parameter constraints and returns a ready
//! [`IandIBundle`](crate::design::IandIBundle). Closed-form expressions for the
//! on-manifold input are exported alongside so the generic pseudoinverse route
//! can be cross-checked against them.

mod cartpend_linear;
mod cartpend_nonlinear;
mod dcac;
mod iwp;
mod lti;
pub mod presets;

pub use cartpend_linear::{
    cartpend_linear_alpha2, cartpend_linear_c, cartpend_linear_potential, cartpend_singularity_margin,
    make_cartpend_linear, CartPendLinearParams,
};
pub use cartpend_nonlinear::{
    cartpend_nonlinear_c, make_cartpend_nonlinear, CartPendNonlinearParams, NonlinearShape,
};
pub use dcac::{dcac_c, make_dcac, DcAcParams, SATURATION_LIMIT};
pub use iwp::{iwp_c, iwp_energy, make_iwp, IwpParams};
pub use lti::{make_lti, LtiParams};

use crate::design::{DesignError, IandIBundle};

/// Which worked design a bundle implements, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PlantKind {
    Lti(LtiParams),
    Iwp(IwpParams),
    CartPendLinear(CartPendLinearParams),
    CartPendNonlinear(CartPendNonlinearParams),
    DcAc(DcAcParams),
}

impl PlantKind {
    pub fn label(&self) -> &'static str {
        match self {
            PlantKind::Lti(_) => "lti",
            PlantKind::Iwp(_) => "iwp",
            PlantKind::CartPendLinear(_) => "cartpend-linear",
            PlantKind::CartPendNonlinear(_) => "cartpend-nonlinear",
            PlantKind::DcAc(_) => "dcac",
        }
    }

    pub fn build(&self) -> Result<IandIBundle, DesignError> {
        match self {
            PlantKind::Lti(p) => make_lti(p.clone()),
            PlantKind::Iwp(p) => make_iwp(*p),
            PlantKind::CartPendLinear(p) => make_cartpend_linear(*p),
            PlantKind::CartPendNonlinear(p) => make_cartpend_nonlinear(*p),
            PlantKind::DcAc(p) => make_dcac(*p),
        }
    }

    /// Slowest exponential rate of the closed-loop `z`-dynamics (a negative
    /// number: `|z|` decays like `e^{rate·t}`).
    pub fn analytic_z_rate(&self) -> f64 {
        match self {
            PlantKind::Lti(_) => -1.0,
            PlantKind::Iwp(p) => second_order_rate(p.gamma1, p.gamma2),
            PlantKind::CartPendLinear(p) => second_order_rate(p.gamma1, p.gamma2),
            PlantKind::CartPendNonlinear(p) => second_order_rate(p.gamma1, p.gamma2),
            PlantKind::DcAc(p) => -p.gamma * p.e / p.l,
        }
    }
}

/// Largest real part of the roots of `s² + γ₁s + γ₂`.
pub fn second_order_rate(gamma1: f64, gamma2: f64) -> f64 {
    let disc = gamma1 * gamma1 - 4.0 * gamma2;
    if disc >= 0.0 {
        0.5 * (-gamma1 + disc.sqrt())
    } else {
        -0.5 * gamma1
    }
}

/// Pole-placement gains for `(s + p)²`: `γ₁ = 2p`, `γ₂ = p²`.
pub fn gains_for_double_pole(p: f64) -> (f64, f64) {
    (2.0 * p, p * p)
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<(), DesignError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(DesignError::Constraint {
            inequality: format!("{name} > 0"),
            detail: format!("{name} = {value}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_pole_rate() {
        let (g1, g2) = gains_for_double_pole(2.0);
        assert_eq!(second_order_rate(g1, g2), -2.0);
    }

    #[test]
    fn complex_pair_rate() {
        // s² + 2s + 2 has roots −1 ± i
        assert!((second_order_rate(2.0, 2.0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn overdamped_rate_is_slowest_root() {
        // s² + 5s + 4 = (s+1)(s+4)
        assert!((second_order_rate(5.0, 4.0) + 1.0).abs() < 1e-12);
    }
}
