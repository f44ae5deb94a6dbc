//! Scalar kernels, Gram blocks and the block-diagonal multi-view kernel.
//!
//! The multi-view kernel between two points is the `v × v` diagonal matrix
//! `G(x, t) = diag(K¹(x¹, t¹), …, Kᵛ(xᵛ, tᵛ))`, where `xⁱ` is the slice of `x`
//! that belongs to view `i`. Gram matrices over point sets use an interleaved
//! layout: row `p·v + i` is view `i` of point `p`.
//!
//! Precomputed kernels address points by index. A point is then a one-element
//! vector holding a row (first argument) or column (second argument) index
//! into the stored matrix; see [`Dataset::indexed`].

use crate::data::{check_view_slices, Dataset, Points};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

/// Guards the χ² denominator against empty histogram bins.
pub const CHI2_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `exp(−γ‖x − t‖²)`
    Gaussian { gamma: f64 },
    /// `exp(−γ Σᵢ (xᵢ − tᵢ)² / (xᵢ + tᵢ + ε))`
    ChiSquared { gamma: f64 },
    Linear,
    Precomputed(Arc<DMatrix<f64>>),
}

impl KernelSpec {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(KernelSpec::Gaussian { gamma })
    }

    pub fn chi_squared(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(KernelSpec::ChiSquared { gamma })
    }

    pub fn precomputed(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("precomputed kernel"));
        }
        if matrix.is_square() {
            let scale = matrix.amax().max(1.0);
            for i in 0..matrix.nrows() {
                for j in 0..i {
                    if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                        return Err(Error::InvalidMatrix(format!(
                            "square precomputed kernel is not symmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(KernelSpec::Precomputed(Arc::new(matrix)))
    }

    /// Evaluates `K(x, t)` with argument checks.
    pub fn eval(&self, x: &[f64], t: &[f64]) -> Result<f64> {
        if x.len() != t.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: t.len(),
            });
        }
        if x.iter().chain(t).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel argument"));
        }
        if let KernelSpec::Precomputed(m) = self {
            let i = precomputed_index(x, m.nrows())?;
            let j = precomputed_index(t, m.ncols())?;
            return Ok(m[(i, j)]);
        }
        Ok(self.eval_unchecked(x, t))
    }

    /// `K(x, t)` without validation; callers guarantee equal lengths and, for
    /// precomputed kernels, in-range integral indices.
    pub(crate) fn eval_unchecked(&self, x: &[f64], t: &[f64]) -> f64 {
        match self {
            KernelSpec::Gaussian { gamma } => {
                let d2: f64 = x.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::ChiSquared { gamma } => {
                let chi: f64 = x
                    .iter()
                    .zip(t)
                    .map(|(a, b)| (a - b) * (a - b) / (a + b + CHI2_EPSILON))
                    .sum();
                (-gamma * chi).exp()
            }
            KernelSpec::Linear => x.iter().zip(t).map(|(a, b)| a * b).sum(),
            KernelSpec::Precomputed(m) => m[(x[0] as usize, t[0] as usize)],
        }
    }

    /// Checks that points of `a` (first argument) and `b` (second argument)
    /// are admissible for this kernel.
    pub(crate) fn check_points(&self, a: &Points, b: &Points) -> Result<()> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        if let KernelSpec::Precomputed(m) = self {
            for row in a.rows() {
                precomputed_index(row, m.nrows())?;
            }
            for row in b.rows() {
                precomputed_index(row, m.ncols())?;
            }
        }
        Ok(())
    }

    pub fn is_precomputed(&self) -> bool {
        matches!(self, KernelSpec::Precomputed(_))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("kernel gamma must be positive, got {gamma}")))
    }
}

fn precomputed_index(x: &[f64], len: usize) -> Result<usize> {
    if x.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: x.len(),
        });
    }
    let v = x[0];
    if v < 0.0 || v.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("precomputed kernel index {v} is not a row index")));
    }
    let i = v as usize;
    if i >= len {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    Ok(i)
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Gaussian { gamma } => write!(f, "gaussian:{gamma:.16e}"),
            KernelSpec::ChiSquared { gamma } => write!(f, "chi2:{gamma:.16e}"),
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Precomputed(m) => write!(f, "precomputed:{}x{}", m.nrows(), m.ncols()),
        }
    }
}

/// Parses `gaussian:<gamma>`, `chi2:<gamma>` and `linear`. Precomputed
/// kernels are loaded from files, not parsed.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let gamma = || -> Result<f64> {
            arg.ok_or_else(|| Error::InvalidParameter(format!("kernel {kind} needs a gamma")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad kernel gamma in {s:?}: {e}")))
        };
        match kind {
            "gaussian" | "rbf" => KernelSpec::gaussian(gamma()?),
            "chi2" | "chi_squared" => KernelSpec::chi_squared(gamma()?),
            "linear" if arg.is_none() => Ok(KernelSpec::Linear),
            _ => Err(Error::InvalidParameter(format!("unknown kernel {s:?}"))),
        }
    }
}

pub fn eval_kernel(spec: &KernelSpec, x: &[f64], t: &[f64]) -> Result<f64> {
    spec.eval(x, t)
}

/// Kernel block over dataset rows: `values[i][j] = K(x_rows[i], x_cols[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: DMatrix<f64>,
    pub row_points: Vec<usize>,
    pub col_points: Vec<usize>,
}

impl GramMatrix {
    pub fn is_square_block(&self) -> bool {
        self.row_points == self.col_points
    }
}

fn check_indices(indices: &[usize], n: usize) -> Result<()> {
    match indices.iter().find(|&&i| i >= n) {
        Some(&index) => Err(Error::IndexOutOfRange { index, len: n }),
        None => Ok(()),
    }
}

pub fn gram(spec: &KernelSpec, data: &Dataset, rows: &[usize], cols: &[usize]) -> Result<GramMatrix> {
    let n = data.len();
    check_indices(rows, n)?;
    check_indices(cols, n)?;
    let points = data.points();
    spec.check_points(points, points)?;
    let values = gram_block(spec, points, rows, points, cols);
    Ok(GramMatrix {
        values,
        row_points: rows.to_vec(),
        col_points: cols.to_vec(),
    })
}

/// Kernel matrix between every point of `a` and every point of `b`.
pub fn cross_gram(spec: &KernelSpec, a: &Points, b: &Points) -> Result<DMatrix<f64>> {
    spec.check_points(a, b)?;
    let ra: Vec<usize> = (0..a.len()).collect();
    let rb: Vec<usize> = (0..b.len()).collect();
    Ok(gram_block(spec, a, &ra, b, &rb))
}

/// Unchecked block assembly; when the two index sets coincide on the same
/// point set, only the upper triangle is evaluated and mirrored.
pub(crate) fn gram_block(spec: &KernelSpec, a: &Points, rows: &[usize], b: &Points, cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    let same = std::ptr::eq(a, b) && rows == cols && !matches!(spec, KernelSpec::Precomputed(m) if !m.is_square());
    if same {
        for j in 0..cols.len() {
            let xj = b.row(cols[j]);
            for i in 0..=j {
                let v = spec.eval_unchecked(a.row(rows[i]), xj);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
    } else {
        for j in 0..cols.len() {
            let xj = b.row(cols[j]);
            for i in 0..rows.len() {
                out[(i, j)] = spec.eval_unchecked(a.row(rows[i]), xj);
            }
        }
    }
    out
}

/// Per-view scalar kernels over disjoint column slices of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewKernel {
    views: Vec<KernelSpec>,
    slices: Vec<Range<usize>>,
}

impl MultiViewKernel {
    pub fn new(views: Vec<KernelSpec>, slices: Vec<Range<usize>>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::InvalidParameter("multi-view kernel needs at least one view".into()));
        }
        if views.len() != slices.len() {
            return Err(Error::DimensionMismatch {
                expected: views.len(),
                found: slices.len(),
            });
        }
        let dim = slices.iter().map(|r| r.end).max().unwrap_or(0);
        check_view_slices(&slices, dim)?;
        Ok(Self { views, slices })
    }

    /// Single view spanning all `dim` input columns.
    pub fn single(spec: KernelSpec, dim: usize) -> Result<Self> {
        Self::new(vec![spec], vec![0..dim])
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[KernelSpec] {
        &self.views
    }

    pub fn slices(&self) -> &[Range<usize>] {
        &self.slices
    }

    pub fn input_dim(&self) -> usize {
        self.slices.iter().map(|r| r.end).max().unwrap_or(0)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: dim,
            });
        }
        Ok(())
    }

    /// One `rows × cols` scalar Gram block per view.
    pub fn per_view_blocks(&self, a: &Points, rows: &[usize], b: &Points, cols: &[usize]) -> Result<Vec<DMatrix<f64>>> {
        self.check_dim(a.dim())?;
        self.check_dim(b.dim())?;
        check_indices(rows, a.len())?;
        check_indices(cols, b.len())?;
        let mut blocks = Vec::with_capacity(self.views.len());
        for (spec, slice) in self.views.iter().zip(&self.slices) {
            let va = slice_points(a, slice);
            let vb = if std::ptr::eq(a, b) {
                None
            } else {
                Some(slice_points(b, slice))
            };
            let vb_ref = vb.as_ref().unwrap_or(&va);
            spec.check_points(&va, vb_ref)?;
            blocks.push(gram_block(spec, &va, rows, vb_ref, cols));
        }
        Ok(blocks)
    }
}

fn slice_points(p: &Points, slice: &Range<usize>) -> Points {
    if slice.start == 0 && slice.end == p.dim() {
        return p.clone();
    }
    let values: Vec<f64> = p.rows().flat_map(|r| r[slice.clone()].iter().copied()).collect();
    Points::new(values, slice.len()).expect("slice of finite points")
}

/// Interleave per-view blocks into the `(r·v) × (c·v)` block-diagonal layout.
pub fn interleave_views(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let v = blocks.len();
    let (r, c) = blocks[0].shape();
    let mut out = DMatrix::zeros(r * v, c * v);
    for (i, block) in blocks.iter().enumerate() {
        for q in 0..c {
            for p in 0..r {
                out[(p * v + i, q * v + i)] = block[(p, q)];
            }
        }
    }
    out
}

pub fn multiview_gram(mvk: &MultiViewKernel, data: &Dataset, rows: &[usize], cols: &[usize]) -> Result<GramMatrix> {
    let points = data.points();
    let blocks = mvk.per_view_blocks(points, rows, points, cols)?;
    Ok(GramMatrix {
        values: interleave_views(&blocks),
        row_points: rows.to_vec(),
        col_points: cols.to_vec(),
    })
}
