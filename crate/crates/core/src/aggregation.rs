//! Linear functional strategy: combine several approximants `f_1 … f_l` into
//! `f_z = Σ c̄_i f_i` with `c̄` solving `H̄ c = h̄`, where
//!
//! ```text
//! H̄_ij = (1/n) Σ_{r≤n} ⟨f_i(x_r), f_j(x_r)⟩      (all points)
//! h̄_i  = (1/m) Σ_{r≤m} ⟨y_r, f_i(x_r)⟩          (labeled points)
//! ```
//!
//! `c̄` minimizes the empirical proxy `Q(c) = cᵀH̄c − 2cᵀh̄`. A singular `H̄`
//! (duplicated members, say) is handled by a pseudoinverse.

use crate::data::{Dataset, Points};
use crate::error::{Error, Result};
use crate::linalg::sym_pinv_solve;
use crate::solver::NystromModel;
use nalgebra::{DMatrix, DVector};

/// Relative eigenvalue cutoff for the `H̄` pseudoinverse.
pub const LFS_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LfsWeights {
    pub hbar: DMatrix<f64>,
    pub hbar_vec: DVector<f64>,
    pub cbar: DVector<f64>,
}

impl LfsWeights {
    /// `Q(c) = cᵀH̄c − 2cᵀh̄`.
    pub fn proxy(&self, c: &DVector<f64>) -> f64 {
        c.dot(&(&self.hbar * c)) - 2.0 * c.dot(&self.hbar_vec)
    }

    pub fn proxy_at_optimum(&self) -> f64 {
        self.proxy(&self.cbar)
    }

    /// Smallest proxy value over single members, `min_i Q(e_i)`.
    pub fn best_member_proxy(&self) -> f64 {
        (0..self.cbar.len())
            .map(|i| self.hbar[(i, i)] - 2.0 * self.hbar_vec[i])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn combine(&self, member_predictions: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
        combine_predictions(member_predictions, &self.cbar)
    }
}

/// LFS weights from member predictions on all `n` dataset points (each
/// `n × P`) and the `m × P` labels of the leading points.
pub fn lfs_from_predictions(predictions: &[DMatrix<f64>], labels: &DMatrix<f64>) -> Result<LfsWeights> {
    let first = predictions.first().ok_or(Error::EmptyInput("aggregation members"))?;
    let shape = first.shape();
    let (n, p) = shape;
    let m = labels.nrows();
    if m == 0 {
        return Err(Error::NoLabels);
    }
    if let Some(bad) = predictions.iter().find(|f| f.shape() != shape) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.nrows(),
        });
    }
    if labels.ncols() != p || m > n {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: labels.ncols(),
        });
    }
    let l = predictions.len();
    let mut hbar = DMatrix::zeros(l, l);
    let mut hbar_vec = DVector::zeros(l);
    for i in 0..l {
        for j in 0..=i {
            let v = predictions[i].dot(&predictions[j]) / n as f64;
            hbar[(i, j)] = v;
            hbar[(j, i)] = v;
        }
        hbar_vec[i] = predictions[i].rows(0, m).dot(labels) / m as f64;
    }
    let rhs = DMatrix::from_column_slice(l, 1, hbar_vec.as_slice());
    let (sol, _) = sym_pinv_solve(&hbar, &rhs, LFS_CUTOFF)?;
    Ok(LfsWeights {
        hbar,
        hbar_vec,
        cbar: sol.column(0).into_owned(),
    })
}

/// `Σ_i c_i F_i`.
pub fn combine_predictions(predictions: &[DMatrix<f64>], weights: &DVector<f64>) -> Result<DMatrix<f64>> {
    let first = predictions.first().ok_or(Error::EmptyInput("aggregation members"))?;
    if weights.len() != predictions.len() {
        return Err(Error::DimensionMismatch {
            expected: predictions.len(),
            found: weights.len(),
        });
    }
    let mut out = DMatrix::zeros(first.nrows(), first.ncols());
    for (f, &c) in predictions.iter().zip(weights.iter()) {
        if f.shape() != first.shape() {
            return Err(Error::DimensionMismatch {
                expected: first.nrows(),
                found: f.nrows(),
            });
        }
        out += f * c;
    }
    Ok(out)
}

/// Nyström members combined by the linear functional strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedModel {
    pub members: Vec<NystromModel>,
    pub lfs: LfsWeights,
}

impl AggregatedModel {
    pub fn cbar(&self) -> &DVector<f64> {
        &self.lfs.cbar
    }

    pub fn member_predictions(&self, query: &Points) -> Result<Vec<DMatrix<f64>>> {
        self.members.iter().map(|m| m.predict(query)).collect()
    }

    pub fn predict(&self, query: &Points) -> Result<DMatrix<f64>> {
        combine_predictions(&self.member_predictions(query)?, &self.lfs.cbar)
    }
}

pub fn aggregate_lfs(members: Vec<NystromModel>, data: &Dataset) -> Result<AggregatedModel> {
    if members.is_empty() {
        return Err(Error::EmptyInput("aggregation members"));
    }
    let preds: Vec<DMatrix<f64>> = members.iter().map(|m| m.predict(data.points())).collect::<Result<_>>()?;
    let lfs = lfs_from_predictions(&preds, data.labels())?;
    Ok(AggregatedModel { members, lfs })
}

pub fn predict_aggregate(agg: &AggregatedModel, query: &Points) -> Result<DMatrix<f64>> {
    agg.predict(query)
}
