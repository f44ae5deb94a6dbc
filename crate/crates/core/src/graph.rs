//! Graph penalties: exponential weights, unnormalized Laplacians, the
//! between-view operator and the multi-view block Laplacian.

use crate::data::Dataset;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Tolerance for Laplacian row sums and symmetry checks.
pub const LAPLACIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    SingleView,
    MultiviewBlock,
    BetweenView,
}

/// A symmetric positive semidefinite quadratic penalty `fᵀ L f` over
/// function values at the dataset points.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPenalty {
    weights: Option<DMatrix<f64>>,
    laplacian: DMatrix<f64>,
    kind: PenaltyKind,
}

impl GraphPenalty {
    pub fn weights(&self) -> Option<&DMatrix<f64>> {
        self.weights.as_ref()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.laplacian.nrows()
    }

    /// Wraps an arbitrary symmetric PSD penalty matrix (e.g. `I_n ⊗ M_v`).
    pub fn from_matrix(matrix: DMatrix<f64>, kind: PenaltyKind) -> Result<Self> {
        check_symmetric(&matrix, "penalty")?;
        Ok(Self {
            weights: None,
            laplacian: matrix,
            kind,
        })
    }
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix(format!("{what} matrix is {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("graph matrix"));
    }
    let scale = m.amax().max(1.0);
    for j in 0..m.ncols() {
        for i in 0..j {
            if (m[(i, j)] - m[(j, i)]).abs() > LAPLACIAN_TOL * scale {
                return Err(Error::InvalidMatrix(format!("{what} matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// `ω_ij = exp(−‖x_i − x_j‖² / 4b)` over the selected dataset rows.
pub fn exp_weights(data: &Dataset, b: f64, rows: &[usize]) -> Result<DMatrix<f64>> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParameter(format!("weight bandwidth b must be positive, got {b}")));
    }
    let points = data.points();
    let n = points.len();
    if let Some(&index) = rows.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    let scale = 1.0 / (4.0 * b);
    let mut w = DMatrix::zeros(rows.len(), rows.len());
    for j in 0..rows.len() {
        let xj = points.row(rows[j]);
        w[(j, j)] = 1.0;
        for i in 0..j {
            let d2: f64 = points
                .row(rows[i])
                .iter()
                .zip(xj)
                .map(|(a, c)| (a - c) * (a - c))
                .sum();
            let v = (-d2 * scale).exp();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    Ok(w)
}

/// Keeps the `k` largest off-diagonal weights in each row, then symmetrizes
/// by taking the elementwise maximum with the transpose. Diagonal entries are
/// kept.
pub fn knn_truncate(w: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    check_symmetric(w, "weight")?;
    let n = w.nrows();
    let mut kept = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        // ties resolved by column index for determinism
        order.sort_by(|&a, &b| w[(i, b)].total_cmp(&w[(i, a)]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            kept[(i, j)] = w[(i, j)];
        }
        kept[(i, i)] = w[(i, i)];
    }
    Ok(kept.zip_map(&kept.transpose(), f64::max))
}

/// Unnormalized Laplacian `L = D − W`, `D_ii = Σ_j ω_ij`.
pub fn laplacian(w: &DMatrix<f64>) -> Result<GraphPenalty> {
    check_symmetric(w, "weight")?;
    if w.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidMatrix("weight matrix has negative entries".into()));
    }
    let n = w.nrows();
    let mut l = -w.clone();
    for i in 0..n {
        // D_ii − ω_ii = Σ_{j≠i} ω_ij
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        l[(i, i)] = off;
    }
    Ok(GraphPenalty {
        weights: Some(w.clone()),
        laplacian: l,
        kind: PenaltyKind::SingleView,
    })
}

/// `M_v = v·I_v − 1 1ᵀ`.
pub fn between_view_operator(v: usize) -> Result<DMatrix<f64>> {
    if v < 1 {
        return Err(Error::InvalidParameter("view count must be at least 1".into()));
    }
    let mut m = DMatrix::from_element(v, v, -1.0);
    for i in 0..v {
        m[(i, i)] = v as f64 - 1.0;
    }
    Ok(m)
}

/// Block Laplacian over `n·v` interleaved rows: block `(i, j)` is
/// `diag(L¹_ij, …, Lᵛ_ij)`.
pub fn multiview_block_laplacian(per_view: &[GraphPenalty]) -> Result<GraphPenalty> {
    let first = per_view.first().ok_or(Error::EmptyInput("per-view Laplacians"))?;
    let n = first.size();
    if let Some(bad) = per_view.iter().find(|l| l.size() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.size(),
        });
    }
    let v = per_view.len();
    let mut out = DMatrix::zeros(n * v, n * v);
    for (k, l) in per_view.iter().enumerate() {
        for j in 0..n {
            for i in 0..n {
                out[(i * v + k, j * v + k)] = l.laplacian[(i, j)];
            }
        }
    }
    Ok(GraphPenalty {
        weights: None,
        laplacian: out,
        kind: PenaltyKind::MultiviewBlock,
    })
}

/// Graph construction parameters: exponential weights with scale `b`,
/// optionally truncated to the `knn` strongest neighbours per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSpec {
    pub b: f64,
    pub knn: Option<usize>,
}

impl GraphSpec {
    pub fn new(b: f64) -> Self {
        Self { b, knn: None }
    }

    pub fn build(&self, data: &Dataset) -> Result<GraphPenalty> {
        dataset_laplacian(data, self.b, self.knn)
    }
}

/// Dataset-level convenience: exponential weights over all points, optional
/// k-NN truncation, then the Laplacian.
pub fn dataset_laplacian(data: &Dataset, b: f64, knn: Option<usize>) -> Result<GraphPenalty> {
    let rows: Vec<usize> = (0..data.len()).collect();
    let mut w = exp_weights(data, b, &rows)?;
    if let Some(k) = knn {
        w = knn_truncate(&w, k)?;
    }
    laplacian(&w)
}
