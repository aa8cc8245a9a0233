//! Orbital stabilization by immersion and invariance.
//!
//! The crate is organised in layers:
//!
//! * [`odesim`]: fixed-step RK4 and adaptive Dormand–Prince integrators,
//!   trajectories, section crossings and period estimation.
//! * [`design`]: the generic construction (plant, target oscillator,
//!   immersion, implicit manifold, feedback) and its residual checks.
//! * [`plants`]: the worked designs and their named presets.
//! * [`analysis`]: orbital distance, decay fits, energy drift, and harnesses
//!   for the perturbation bounds used in the boundedness arguments.
//!
//! ```
//! use iandi::design::validate_bundle;
//! use iandi::plants::{make_iwp, presets};
//!
//! let bundle = make_iwp(presets::iwp_paper()).unwrap();
//! let report = validate_bundle(&bundle, 200, 7);
//! assert!(report.passes());
//! ```

pub mod analysis;
pub mod design;
pub mod linalg;
pub mod odesim;
pub mod plants;
pub mod quadrature;

pub use design::{IandIBundle, OrbitKind};
pub use odesim::{Trajectory, VectorField};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/integrators.md")]
    mod integrators {}
    #[doc = include_str!("../../../book/src/plants.md")]
    mod plants {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
}
