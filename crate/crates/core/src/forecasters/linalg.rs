use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Smallest acceptable ratio of the squared extreme Cholesky pivots before a
/// Gram matrix is treated as rank deficient.
const RCOND_FLOOR: f64 = 1e-12;

fn factor(gram: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let chol = gram.cholesky()?;
    let diag = chol.l_dirty().diagonal();
    let max = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let rcond = min * min / (max * max);
    if max == 0.0 || rcond.is_nan() || rcond < RCOND_FLOOR {
        return None;
    }
    Some(chol)
}

/// Least squares through the normal equations; when they are rank deficient
/// `ridge · I` is added to the Gram matrix.
pub(crate) fn least_squares(design: &DMatrix<f64>, target: &DVector<f64>, ridge: f64) -> Option<DVector<f64>> {
    let gram = design.transpose() * design;
    let rhs = design.transpose() * target;
    if let Some(chol) = factor(gram.clone()) {
        return Some(chol.solve(&rhs));
    }
    let n = gram.nrows();
    let regularized = gram + DMatrix::identity(n, n) * ridge;
    regularized.cholesky().map(|c| c.solve(&rhs))
}

/// Ridge regression with an unpenalized last column (the intercept), solved
/// for several targets at once.
pub(crate) fn ridge_with_intercept(design: &DMatrix<f64>, targets: &DMatrix<f64>, ridge: f64) -> Option<DMatrix<f64>> {
    let mut gram = design.transpose() * design;
    let n = gram.nrows();
    for i in 0..n.saturating_sub(1) {
        gram[(i, i)] += ridge;
    }
    let rhs = design.transpose() * targets;
    gram.cholesky().map(|c| c.solve(&rhs))
}
