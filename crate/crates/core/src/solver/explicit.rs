//! Finite-dimensional realization of the Nyström minimizer in operator form.
//!
//! With an explicit feature map `Φ` (`n × d`), the RKHS is `R^d` and every
//! operator in `(P S*S P + λ₀ I + Σ λ_j P B_j*B_j P) f = P S* y` is a small
//! matrix: `S*S = Φ_mᵀΦ_m / m`, `S* y = Φ_mᵀ y / m`, `P` the orthogonal
//! projector onto the row space of the landmark features, and
//! `B_j*B_j = w·Φᵀ L_j Φ` with the graph weight `w` of the matrix form.
//! The solve never touches a kernel matrix, so it checks the kernel-form
//! solver independently.

use super::LaplacianScaling;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Largest feature dimension the oracle accepts.
pub const MAX_FEATURE_DIM: usize = 50;

#[derive(Debug, Clone)]
pub struct ExplicitFeatureProblem {
    /// `n × d`; row `i` is the feature vector of point `i`.
    pub features: DMatrix<f64>,
    /// `m × P`, labels of the first `m` points.
    pub labels: DMatrix<f64>,
    pub lambda0: f64,
    /// `(λ_j, L_j)` with `L_j` of size `n × n`.
    pub penalties: Vec<(f64, DMatrix<f64>)>,
    pub scaling: LaplacianScaling,
}

/// Solves the operator equation and returns the feature-space weights
/// (`d × P`); predictions are `Φ_query · f`.
pub fn oracle_solve_explicit(problem: &ExplicitFeatureProblem, landmarks: &[usize]) -> Result<DMatrix<f64>> {
    let phi = &problem.features;
    let (n, d) = phi.shape();
    let m = problem.labels.nrows();
    if d > MAX_FEATURE_DIM {
        return Err(Error::InvalidParameter(format!("feature dimension {d} exceeds {MAX_FEATURE_DIM}")));
    }
    if m == 0 || m > n {
        return Err(Error::NoLabels);
    }
    if landmarks.is_empty() {
        return Err(Error::EmptyLandmarks);
    }
    let inv_m = 1.0 / m as f64;
    let phi_m = phi.rows(0, m);
    let sampling = phi_m.transpose() * phi_m * inv_m;
    let rhs_free = phi_m.transpose() * &problem.labels * inv_m;

    let mut phi_s = DMatrix::zeros(landmarks.len(), d);
    for (r, &l) in landmarks.iter().enumerate() {
        if l >= n {
            return Err(Error::IndexOutOfRange { index: l, len: n });
        }
        phi_s.row_mut(r).copy_from(&phi.row(l));
    }
    let projector = row_space_projector(&phi_s);

    let w = problem.scaling.system_factor(m) * inv_m;
    let mut op = &projector * sampling * &projector;
    for i in 0..d {
        op[(i, i)] += problem.lambda0;
    }
    for (lambda, l) in &problem.penalties {
        if l.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.nrows(),
            });
        }
        let bb = phi.transpose() * l * phi * w;
        op += (&projector * bb * &projector) * *lambda;
    }
    let rhs = &projector * rhs_free;
    op.lu().solve(&rhs).ok_or(Error::Singular { condition: f64::INFINITY })
}

/// `V_r V_rᵀ` from the SVD of `a`, keeping singular values above
/// `1e-12·σ_max`.
fn row_space_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let top = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let mut p = DMatrix::zeros(d, d);
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > 1e-12 * top {
            let row = v_t.row(k);
            p += row.transpose() * row;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_landmarks_no_graph_is_feature_ridge() {
        let phi = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.5, 1.0, -1.0, 2.0, 0.3, 0.3]);
        let y = DMatrix::from_row_slice(4, 1, &[1.0, -1.0, 0.5, 0.0]);
        let problem = ExplicitFeatureProblem {
            features: phi.clone(),
            labels: y.clone(),
            lambda0: 0.1,
            penalties: vec![],
            scaling: LaplacianScaling::TimesM,
        };
        let f = oracle_solve_explicit(&problem, &[0, 1, 2, 3]).unwrap();
        // normal equations (ΦᵀΦ/m + λI) f = Φᵀy/m
        let mut a = phi.transpose() * &phi / 4.0;
        a[(0, 0)] += 0.1;
        a[(1, 1)] += 0.1;
        let want = a.lu().solve(&(phi.transpose() * y / 4.0)).unwrap();
        assert!((f - want).amax() < 1e-13);
    }

    #[test]
    fn identity_features_single_label() {
        // Φ = I_3, one labeled point y_1 = 2, landmarks {0, 1}, λ₀ = 1:
        // P = diag(1,1,0), S*S = e₁e₁ᵀ, S*y = 2e₁ → (diag(2,1,1)) f = 2e₁
        let problem = ExplicitFeatureProblem {
            features: DMatrix::identity(3, 3),
            labels: DMatrix::from_element(1, 1, 2.0),
            lambda0: 1.0,
            penalties: vec![],
            scaling: LaplacianScaling::TimesM,
        };
        let f = oracle_solve_explicit(&problem, &[0, 1]).unwrap();
        assert!((f[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(f[(1, 0)].abs() < 1e-15);
        assert!(f[(2, 0)].abs() < 1e-15);
    }

    #[test]
    fn rejects_large_dimension() {
        let problem = ExplicitFeatureProblem {
            features: DMatrix::zeros(2, 51),
            labels: DMatrix::zeros(1, 1),
            lambda0: 1.0,
            penalties: vec![],
            scaling: LaplacianScaling::TimesM,
        };
        assert!(oracle_solve_explicit(&problem, &[0]).is_err());
    }
}
