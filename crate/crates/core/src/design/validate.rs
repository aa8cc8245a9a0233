use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    constraint_residual, fbi_residual, manifold_residual, IandIBundle, SampleBox,
};
use crate::linalg::{min_singular_value, numerical_jacobian, relative_discrepancy, RANK_FLOOR};

/// Pass thresholds for [`ValidationReport::passes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub fbi: f64,
    pub manifold: f64,
    pub constraint: f64,
    pub jacobian: f64,
    pub rank_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fbi: 1e-9,
            manifold: 1e-12,
            constraint: 1e-9,
            jacobian: 1e-6,
            rank_floor: RANK_FLOOR,
        }
    }
}

/// Worst-case residuals of a bundle over a seeded random grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub bundle: String,
    pub grid_size: usize,
    pub seed: u64,
    /// `ξ` samples whose image was admissible and got evaluated.
    pub xi_samples: usize,
    pub xi_skipped: usize,
    pub x_samples: usize,
    pub x_skipped: usize,
    pub fbi_max: f64,
    pub manifold_max: f64,
    pub constraint_max: f64,
    pub pi_jacobian_max: f64,
    pub phi_jacobian_max: f64,
    pub g_rank_margin_min: f64,
    pub tolerances: Tolerances,
}

impl ValidationReport {
    pub fn fbi_ok(&self) -> bool {
        self.fbi_max <= self.tolerances.fbi
    }

    pub fn manifold_ok(&self) -> bool {
        self.manifold_max <= self.tolerances.manifold
    }

    pub fn constraint_ok(&self) -> bool {
        self.constraint_max <= self.tolerances.constraint
    }

    pub fn jacobians_ok(&self) -> bool {
        self.pi_jacobian_max <= self.tolerances.jacobian
            && self.phi_jacobian_max <= self.tolerances.jacobian
    }

    pub fn rank_ok(&self) -> bool {
        self.g_rank_margin_min > self.tolerances.rank_floor
    }

    /// All checks pass and at least one point of each grid was evaluated.
    pub fn passes(&self) -> bool {
        self.xi_samples > 0
            && self.x_samples > 0
            && self.fbi_ok()
            && self.manifold_ok()
            && self.constraint_ok()
            && self.jacobians_ok()
            && self.rank_ok()
    }

    /// `key = value` lines, one per field, followed by a `status` line.
    ///
    /// Floats use Rust's shortest round-trip formatting in scientific notation.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("bundle", self.bundle.clone());
        kv("grid_size", self.grid_size.to_string());
        kv("seed", self.seed.to_string());
        kv("xi_samples", self.xi_samples.to_string());
        kv("xi_skipped", self.xi_skipped.to_string());
        kv("x_samples", self.x_samples.to_string());
        kv("x_skipped", self.x_skipped.to_string());
        kv("fbi_max", format!("{:e}", self.fbi_max));
        kv("fbi_tol", format!("{:e}", self.tolerances.fbi));
        kv("manifold_max", format!("{:e}", self.manifold_max));
        kv("manifold_tol", format!("{:e}", self.tolerances.manifold));
        kv("constraint_max", format!("{:e}", self.constraint_max));
        kv("constraint_tol", format!("{:e}", self.tolerances.constraint));
        kv("pi_jacobian_max", format!("{:e}", self.pi_jacobian_max));
        kv("phi_jacobian_max", format!("{:e}", self.phi_jacobian_max));
        kv("jacobian_tol", format!("{:e}", self.tolerances.jacobian));
        kv("g_rank_margin_min", format!("{:e}", self.g_rank_margin_min));
        kv("status", if self.passes() { "pass" } else { "fail" }.to_string());
        out
    }
}

fn draw(rng: &mut ChaCha8Rng, b: &SampleBox) -> Vec<f64> {
    b.lower
        .iter()
        .zip(&b.upper)
        .map(|(&lo, &hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
        .collect()
}

/// Draws `grid_size` points from each sample box and records the worst
/// residuals, Jacobian discrepancies against central differences, and the
/// smallest singular value of `g`. Points where the plant or controller is
/// inadmissible are skipped and counted. Deterministic in `seed`.
pub fn validate_bundle(bundle: &IandIBundle, grid_size: usize, seed: u64) -> ValidationReport {
    validate_bundle_with(bundle, grid_size, seed, Tolerances::default())
}

pub fn validate_bundle_with(
    bundle: &IandIBundle,
    grid_size: usize,
    seed: u64,
    tolerances: Tolerances,
) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ValidationReport {
        bundle: bundle.name.clone(),
        grid_size,
        seed,
        xi_samples: 0,
        xi_skipped: 0,
        x_samples: 0,
        x_skipped: 0,
        fbi_max: 0.0,
        manifold_max: 0.0,
        constraint_max: 0.0,
        pi_jacobian_max: 0.0,
        phi_jacobian_max: 0.0,
        g_rank_margin_min: f64::INFINITY,
        tolerances,
    };

    for _ in 0..grid_size {
        let xi = draw(&mut rng, &bundle.xi_sample_box);
        let residuals = (|| {
            let fbi = fbi_residual(bundle, &xi)?.amax();
            let constraint = constraint_residual(bundle, &xi)?.amax();
            Ok::<_, super::DesignError>((fbi, constraint))
        })();
        let Ok((fbi, constraint)) = residuals else {
            report.xi_skipped += 1;
            continue;
        };
        report.xi_samples += 1;
        report.fbi_max = nan_max(report.fbi_max, fbi);
        report.constraint_max = nan_max(report.constraint_max, constraint);
        report.manifold_max = nan_max(report.manifold_max, manifold_residual(bundle, &xi).amax());
        let fd = numerical_jacobian(|s| bundle.immersion.pi(s), &xi);
        report.pi_jacobian_max = nan_max(
            report.pi_jacobian_max,
            relative_discrepancy(&bundle.immersion.jacobian(&xi), &fd),
        );
    }

    for _ in 0..grid_size {
        let x = draw(&mut rng, &bundle.x_sample_box);
        if bundle.plant.admissible(&x).is_err() {
            report.x_skipped += 1;
            continue;
        }
        report.x_samples += 1;
        let fd = numerical_jacobian(|s| bundle.manifold.phi(s), &x);
        report.phi_jacobian_max = nan_max(
            report.phi_jacobian_max,
            relative_discrepancy(&bundle.manifold.jacobian(&x), &fd),
        );
        let sigma = min_singular_value(&bundle.plant.input_matrix(&x));
        report.g_rank_margin_min = report.g_rank_margin_min.min(sigma);
    }
    report
}

// NaN must fail the check, so it wins the max.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
