//! Datasets, ingestion, fold splitting and synthetic problems.
//!
//! A [`Dataset`] holds `n` input points and labels for the first `m` of them;
//! rows `m..n` are unlabeled and only enter graph penalties.

mod folds;
mod load;
mod nslkdd;
mod synthetic;

pub use folds::{kfold_split, paper_protocol, Fold, FoldScheme};
pub use load::{load_csv, load_matrix_csv, one_hot_labels, CsvOptions, LabelColumn};
pub use nslkdd::{preprocess_nslkdd, read_raw_rows, MinMaxScaler, NslKddEncoder, NslKddPreprocessed, NSLKDD_ATTRIBUTES};
pub use synthetic::{gen_synthetic, SyntheticSample, SyntheticTarget};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::ops::Range;

/// Dense row-major point set; each row is one input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    values: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("point dimension must be positive".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: values.len() % dim,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("points"));
        }
        Ok(Self { values, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptyInput("points"))?;
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(values, dim)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            values.extend(m.row(i).iter());
        }
        Self::new(values, m.ncols())
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn select(&self, indices: &[usize]) -> Result<Points> {
        let n = self.len();
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            values.extend_from_slice(self.row(i));
        }
        Ok(Points {
            values,
            dim: self.dim,
        })
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.dim, &self.values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Labeled and unlabeled inputs: `x` has `n` rows, `y` has `m <= n` rows, one
/// per leading point of `x`, and `P` output columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Points,
    y: DMatrix<f64>,
    view_slices: Option<Vec<Range<usize>>>,
}

impl Dataset {
    pub fn new(x: Points, y: DMatrix<f64>) -> Result<Self> {
        if y.nrows() > x.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} points",
                y.nrows(),
                x.len()
            )));
        }
        if y.ncols() == 0 {
            return Err(Error::InvalidParameter("labels need at least one output column".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("labels"));
        }
        Ok(Self {
            x,
            y,
            view_slices: None,
        })
    }

    /// Dataset whose points are plain row indices `0..n`, used with
    /// precomputed kernels. With `views > 1` every view column repeats the index.
    pub fn indexed(n: usize, views: usize, y: DMatrix<f64>) -> Result<Self> {
        let views = views.max(1);
        let values = (0..n)
            .flat_map(|i| std::iter::repeat_n(i as f64, views))
            .collect();
        let mut data = Self::new(Points::new(values, views)?, y)?;
        if views > 1 {
            data.view_slices = Some((0..views).map(|v| v..v + 1).collect());
        }
        Ok(data)
    }

    pub fn with_view_slices(mut self, slices: Vec<Range<usize>>) -> Result<Self> {
        check_view_slices(&slices, self.x.dim())?;
        self.view_slices = Some(slices);
        Ok(self)
    }

    pub fn points(&self) -> &Points {
        &self.x
    }

    pub fn labels(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// Number of labeled points `m`.
    pub fn labeled(&self) -> usize {
        self.y.nrows()
    }

    /// Total number of points `n`.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.y.ncols()
    }

    pub fn view_slices(&self) -> Option<&[Range<usize>]> {
        self.view_slices.as_deref()
    }

    /// Labels zero-padded to `n` rows.
    pub fn padded_labels(&self) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(self.len(), self.outputs());
        y.rows_mut(0, self.labeled()).copy_from(&self.y);
        y
    }

    /// Sub-dataset over `indices`; the first `labeled` of them must be
    /// labeled rows of `self` and become the labeled rows of the result.
    pub fn select(&self, indices: &[usize], labeled: usize) -> Result<Dataset> {
        if labeled > indices.len() {
            return Err(Error::InvalidParameter(format!(
                "{labeled} labeled rows requested from {} indices",
                indices.len()
            )));
        }
        let x = self.x.select(indices)?;
        let mut y = DMatrix::zeros(labeled, self.outputs());
        for (r, &i) in indices[..labeled].iter().enumerate() {
            if i >= self.labeled() {
                return Err(Error::InvalidParameter(format!("row {i} has no label")));
            }
            y.row_mut(r).copy_from(&self.y.row(i));
        }
        Ok(Dataset {
            x,
            y,
            view_slices: self.view_slices.clone(),
        })
    }
}

pub(crate) fn check_view_slices(slices: &[Range<usize>], dim: usize) -> Result<()> {
    if slices.is_empty() {
        return Err(Error::InvalidParameter("at least one view is required".into()));
    }
    let mut sorted: Vec<_> = slices.to_vec();
    sorted.sort_by_key(|r| r.start);
    let mut next = 0;
    for r in &sorted {
        if r.start != next || r.end <= r.start {
            return Err(Error::InvalidParameter(format!(
                "view slices must be disjoint, nonempty and cover 0..{dim}"
            )));
        }
        next = r.end;
    }
    if next != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: next,
        });
    }
    Ok(())
}
