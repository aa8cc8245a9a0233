//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("matrix is {rows}x{cols}; a left annihilator needs more rows than columns")]
    Shape { rows: usize, cols: usize },
    #[error("matrix is rank deficient (smallest singular value {sigma_min:e})")]
    Deficient { sigma_min: f64 },
}

/// Singular values below this are treated as zero when checking full column rank.
pub const RANK_FLOOR: f64 = 1e-10;

/// Smallest singular value of `g`.
pub fn min_singular_value(g: &DMatrix<f64>) -> f64 {
    g.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Orthonormal full-rank left annihilator of a tall matrix.
///
/// For `G` of size `n×m` with rank `m < n`, returns `B` of size `(n−m)×n` with
/// `B·G = 0` and `B·Bᵀ = I`. The rows are the left singular vectors of `G`
/// belonging to the zero singular values, taken in the order the decomposition
/// returns them (descending singular value), each flipped so its first entry
/// larger than `1e-12` in magnitude is positive.
pub fn left_annihilator(g: &DMatrix<f64>) -> Result<DMatrix<f64>, RankError> {
    let (n, m) = g.shape();
    if m >= n || m == 0 {
        return Err(RankError::Shape { rows: n, cols: m });
    }
    let sigma_min = min_singular_value(g);
    if !(sigma_min > RANK_FLOOR) {
        return Err(RankError::Deficient { sigma_min });
    }
    // Pad to square so the decomposition returns a full n×n U.
    let mut square = DMatrix::<f64>::zeros(n, n);
    square.columns_mut(0, m).copy_from(g);
    let svd = square.svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let mut b = DMatrix::<f64>::zeros(n - m, n);
    for (row, &col) in order[m..].iter().enumerate() {
        let mut v: DVector<f64> = u.column(col).into_owned();
        if let Some(first) = v.iter().find(|e| e.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        b.row_mut(row).copy_from(&v.transpose());
    }
    // One refinement step B ← B − (Bg)(gᵀg)⁻¹gᵀ removes the rounding-level
    // leakage of the SVD rows onto im g, which large drift entries amplify.
    let gram = g.transpose() * g;
    if let Some(chol) = gram.cholesky() {
        let leak = &b * g;
        b -= chol.solve(&leak.transpose()).transpose() * g.transpose();
    }
    Ok(b)
}

/// Central-difference Jacobian of `f` at `x` with step `1e-6·max(1, |x_i|)`.
pub fn numerical_jacobian<F>(f: F, x: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let f0 = f(x);
    let mut jac = DMatrix::<f64>::zeros(f0.len(), x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        let fp = f(&probe);
        probe[j] = x[j] - h;
        let fm = f(&probe);
        probe[j] = x[j];
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    jac
}

/// `max |a − b| / max(1, max |a|)`: the discrepancy measure used for Jacobian
/// cross-checks.
pub fn relative_discrepancy(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(1.0);
    (a - b).amax() / scale
}

/// Least-squares solve `(GᵀG)⁻¹Gᵀ r`, rejecting a singular Gram matrix.
pub fn pseudo_solve(g: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>, RankError> {
    let sigma_min = min_singular_value(g);
    if !(sigma_min > RANK_FLOOR) {
        return Err(RankError::Deficient { sigma_min });
    }
    let gram = g.transpose() * g;
    let rhs = g.transpose() * r;
    let chol = gram.cholesky().ok_or(RankError::Deficient { sigma_min })?;
    Ok(chol.solve(&rhs))
}
