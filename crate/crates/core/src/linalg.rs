//! Dense factorization helpers shared by the solvers.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Condition estimates above this are reported as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Relative asymmetry `‖A − Aᵀ‖_F / ‖A‖_F`; zero for the zero matrix.
pub fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - a.transpose()).norm() / norm
}

/// Returns `(A + Aᵀ)/2`, or an error if `A` is asymmetric beyond `tol`.
pub fn symmetrize_checked(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let relative = relative_asymmetry(a);
    if relative > tol {
        return Err(Error::Asymmetric { relative });
    }
    Ok((a + a.transpose()) * 0.5)
}

/// Moore-Penrose solve `A† B` for symmetric `A` via eigendecomposition.
///
/// Eigenvalues with magnitude at most `rel_cutoff · max|λ|` are dropped.
/// Returns the solution and the retained rank.
pub fn sym_pinv_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_cutoff: f64) -> Result<(DMatrix<f64>, usize)> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("system matrix"));
    }
    let eig = a.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if top == 0.0 {
        return Ok((DMatrix::zeros(a.ncols(), b.ncols()), 0));
    }
    let threshold = rel_cutoff * top;
    let vt_b = eig.eigenvectors.transpose() * b;
    let mut scaled = vt_b;
    let mut rank = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let factor = if lambda.abs() > threshold {
            rank += 1;
            1.0 / lambda
        } else {
            0.0
        };
        scaled.row_mut(k).scale_mut(factor);
    }
    Ok((&eig.eigenvectors * scaled, rank))
}

/// Pseudoinverse of a symmetric matrix with the same cutoff rule as
/// [`sym_pinv_solve`].
pub fn sym_pinv(a: &DMatrix<f64>, rel_cutoff: f64) -> Result<DMatrix<f64>> {
    let id = DMatrix::identity(a.nrows(), a.nrows());
    sym_pinv_solve(a, &id, rel_cutoff).map(|(x, _)| x)
}

/// General dense solve by LU with partial pivoting.
///
/// The condition estimate is the ratio of largest to smallest pivot magnitude;
/// systems above [`MAX_CONDITION`] fail with [`Error::Singular`].
pub fn lu_solve(a: DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("system matrix"));
    }
    let lu = a.lu();
    let condition = pivot_condition(&lu.u());
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Singular { condition });
    }
    lu.solve(b).ok_or(Error::Singular { condition })
}

fn pivot_condition(u: &DMatrix<f64>) -> f64 {
    let diag = u.diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    let mut values: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    DVector::from_vec(values)
}
