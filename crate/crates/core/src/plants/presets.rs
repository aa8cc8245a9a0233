//! Named parameter sets for the worked designs.

use std::f64::consts::PI;

use super::{
    gains_for_double_pole, CartPendLinearParams, CartPendNonlinearParams, DcAcParams, IwpParams,
    LtiParams, PlantKind,
};

pub const LTI_IDENTITY: &str = "lti-identity";
pub const IWP_PAPER: &str = "iwp-paper";
pub const CARTPEND_LIN_PAPER: &str = "cartpend-lin-paper";
pub const CARTPEND_NL_PAPER: &str = "cartpend-nl-paper";
pub const DCAC_DEFAULT: &str = "dcac-default";

pub const NAMES: [&str; 5] = [
    LTI_IDENTITY,
    IWP_PAPER,
    CARTPEND_LIN_PAPER,
    CARTPEND_NL_PAPER,
    DCAC_DEFAULT,
];

/// Wheel-pendulum gains used in the gain sweep.
pub const IWP_K_SWEEP: [f64; 4] = [-1.4, -1.6, -1.8, -2.0];
/// Cart-pendulum gains used in the gain sweep.
pub const CARTPEND_K_SWEEP: [f64; 3] = [-3.0, -4.0, -6.0];
/// Double-pole locations `p` for `(s + p)²`.
pub const POLE_SWEEP: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];

pub fn lti_identity() -> LtiParams {
    LtiParams::default()
}

/// `m = 1.962`, `b = 10`, `k = −1.6` (so `a = 0.1308`), double pole at 1.
pub fn iwp_paper() -> IwpParams {
    let (gamma1, gamma2) = gains_for_double_pole(1.0);
    IwpParams {
        m: 1.962,
        b: 10.0,
        k: -1.6,
        gamma1,
        gamma2,
    }
}

pub fn cartpend_lin_paper() -> CartPendLinearParams {
    CartPendLinearParams {
        a1: 9.8,
        a2: 1.0,
        k: -4.0,
        gamma1: 2.0,
        gamma2: 2.0,
    }
}

pub fn cartpend_nl_paper() -> CartPendNonlinearParams {
    CartPendNonlinearParams {
        a1: 9.8,
        a2: 1.0,
        a: 2.0,
        a0: 0.0,
        gamma1: 1.0,
        gamma2: 1.0,
    }
}

/// 50 Hz, 120 V amplitude from a 200 V source. `γ = 5e−3` puts the
/// off-manifold decay at `γE/L = 1000 /s`.
pub fn dcac_default() -> DcAcParams {
    DcAcParams {
        r: 10.0,
        c: 1e-3,
        l: 1e-3,
        e: 200.0,
        amplitude: 120.0,
        omega: 100.0 * PI,
        gamma: 5e-3,
    }
}

pub fn lookup(name: &str) -> Option<PlantKind> {
    Some(match name {
        LTI_IDENTITY => PlantKind::Lti(lti_identity()),
        IWP_PAPER => PlantKind::Iwp(iwp_paper()),
        CARTPEND_LIN_PAPER => PlantKind::CartPendLinear(cartpend_lin_paper()),
        CARTPEND_NL_PAPER => PlantKind::CartPendNonlinear(cartpend_nl_paper()),
        DCAC_DEFAULT => PlantKind::DcAc(dcac_default()),
        _ => return None,
    })
}

/// One-line description for listings.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        LTI_IDENTITY => "linear oscillator, P = R = I",
        IWP_PAPER => "inertia wheel pendulum, m = 1.962, b = 10, k = -1.6, poles at -1",
        CARTPEND_LIN_PAPER => "cart-pendulum, linear immersion, a1 = 9.8, a2 = 1, k = -4, gamma = (2, 2)",
        CARTPEND_NL_PAPER => "cart-pendulum, nonlinear immersion, a = 2, a0 = 0, gamma = (1, 1)",
        DCAC_DEFAULT => "DC-AC converter, R = 10, C = L = 1e-3, E = 200, A = 120, 50 Hz",
        _ => return None,
    })
}
