use super::{Dataset, Points};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::io::Read;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// No label column; every field is a feature.
    None,
    #[default]
    Last,
    /// Zero-based column index.
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label: LabelColumn,
    /// Treat the label column as an integer class id and expand it to ±1
    /// one-hot rows.
    pub one_hot: bool,
    /// Rows with labels; `None` takes the leading rows with a nonempty label.
    pub labeled_count: Option<usize>,
}

fn records<R: Read>(reader: R, has_header: bool) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if i == 0 && has_header {
            continue;
        }
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push((i + 1, rec));
    }
    Ok(out)
}

fn parse_field(row: usize, column: usize, field: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        row,
        column: column + 1,
        message: format!("not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column: column + 1,
            message: "non-finite value".into(),
        });
    }
    Ok(v)
}

/// Length of the leading run of rows with a nonempty label field. Every
/// later row must leave the field empty.
fn labeled_prefix(recs: &[(usize, csv::StringRecord)], col: usize) -> Result<usize> {
    let filled = |r: &csv::StringRecord| r.get(col).is_some_and(|f| !f.is_empty());
    let m = recs.iter().take_while(|(_, r)| filled(r)).count();
    if let Some((row, _)) = recs[m..].iter().find(|(_, r)| filled(r)) {
        return Err(Error::Parse {
            row: *row,
            column: col + 1,
            message: "labeled row after unlabeled rows".into(),
        });
    }
    Ok(m)
}

/// Reads a numeric CSV. The first `labeled_count` rows carry labels; label
/// fields of later rows are ignored. Without a count, the labeled rows are
/// the leading rows whose label field is nonempty.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    read_csv(std::fs::File::open(path)?, options)
}

pub(crate) fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let recs = records(reader, options.has_header)?;
    let width = recs.first().map(|(_, r)| r.len()).ok_or(Error::EmptyInput("csv file"))?;
    let label_col = match options.label {
        LabelColumn::None => None,
        LabelColumn::Last => Some(width - 1),
        LabelColumn::Index(c) if c < width => Some(c),
        LabelColumn::Index(c) => {
            return Err(Error::InvalidParameter(format!("label column {c} outside {width} columns")))
        }
    };
    let dim = width - usize::from(label_col.is_some());
    if dim == 0 {
        return Err(Error::InvalidParameter("no feature columns".into()));
    }
    let n = recs.len();
    let m = match (label_col, options.labeled_count) {
        (None, _) => 0,
        (Some(_), Some(0)) => return Err(Error::NoLabels),
        (Some(_), Some(m)) if m > n => {
            return Err(Error::InvalidParameter(format!("{m} labeled rows requested, file has {n}")))
        }
        (Some(_), Some(m)) => m,
        (Some(c), None) => labeled_prefix(&recs, c)?,
    };

    let mut values = Vec::with_capacity(n * dim);
    let mut raw_labels = Vec::with_capacity(m);
    for (idx, (row, rec)) in recs.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::Parse {
                row: *row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == label_col {
                if idx < m {
                    raw_labels.push(parse_field(*row, c, field)?);
                }
            } else {
                values.push(parse_field(*row, c, field)?);
            }
        }
    }
    let y = if label_col.is_none() {
        DMatrix::zeros(0, 1)
    } else if options.one_hot {
        let classes = raw_labels
            .iter()
            .zip(&recs)
            .map(|(&v, (row, _))| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Parse {
                        row: *row,
                        column: label_col.unwrap() + 1,
                        message: format!("class id must be a nonnegative integer, got {v}"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let k = classes.iter().max().map_or(1, |&c| c + 1);
        one_hot_labels(&classes, k)?
    } else {
        DMatrix::from_column_slice(m, 1, &raw_labels)
    };
    Dataset::new(Points::new(values, dim)?, y)
}

/// Header-free numeric matrix, e.g. a precomputed kernel.
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_matrix(std::fs::File::open(path)?)
}

pub(crate) fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let recs = records(reader, false)?;
    let width = recs.first().map(|(_, r)| r.len()).ok_or(Error::EmptyInput("matrix file"))?;
    let mut values = Vec::with_capacity(recs.len() * width);
    for (row, rec) in &recs {
        if rec.len() != width {
            return Err(Error::Parse {
                row: *row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        for (c, field) in rec.iter().enumerate() {
            values.push(parse_field(*row, c, field)?);
        }
    }
    Ok(DMatrix::from_row_slice(recs.len(), width, &values))
}

/// Class ids to rows with `+1` at the class position and `−1` elsewhere.
pub fn one_hot_labels(classes: &[usize], k: usize) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one class".into()));
    }
    let mut y = DMatrix::from_element(classes.len(), k, -1.0);
    for (r, &c) in classes.iter().enumerate() {
        if c >= k {
            return Err(Error::IndexOutOfRange { index: c, len: k });
        }
        y[(r, c)] = 1.0;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> CsvOptions {
        CsvOptions::default()
    }

    #[test]
    fn two_rows_all_labeled() {
        let d = read_csv("0.5,1\n0.25,-1\n".as_bytes(), &opts()).unwrap();
        assert_eq!((d.len(), d.labeled(), d.points().dim()), (2, 2, 1));
        assert_eq!(d.labels()[(1, 0)], -1.0);
    }

    #[test]
    fn zero_labeled_is_error() {
        let o = CsvOptions {
            labeled_count: Some(0),
            ..opts()
        };
        let err = read_csv("0.5,1\n".as_bytes(), &o).unwrap_err();
        assert_eq!(err.to_string(), "no labeled data");
    }

    #[test]
    fn unlabeled_rows_ignore_label_field() {
        let o = CsvOptions {
            labeled_count: Some(1),
            has_header: true,
            ..opts()
        };
        let d = read_csv("x,y\n1,1\n2,?\n".as_bytes(), &o).unwrap();
        assert_eq!((d.len(), d.labeled()), (2, 1));
    }

    #[test]
    fn labeled_prefix_inferred() {
        let d = read_csv("1,1\n2,-1\n3,\n4,\n".as_bytes(), &opts()).unwrap();
        assert_eq!((d.len(), d.labeled()), (4, 2));
        assert!(read_csv("1,1\n2,\n3,1\n".as_bytes(), &opts()).is_err());
    }

    #[test]
    fn parse_error_location() {
        match read_csv("1,2\n3,x\n".as_bytes(), &opts()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn label_column_by_index_and_one_hot() {
        let o = CsvOptions {
            label: LabelColumn::Index(0),
            one_hot: true,
            ..opts()
        };
        let d = read_csv("2,0.1\n0,0.2\n".as_bytes(), &o).unwrap();
        assert_eq!(d.outputs(), 3);
        assert_eq!(d.labels().row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, -1.0, 1.0]);
        assert_eq!(d.points().row(1), &[0.2]);
    }

    #[test]
    fn matrix_file() {
        let k = read_matrix("1,0.5\n0.5,1\n".as_bytes()).unwrap();
        assert_eq!(k, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        assert!(read_matrix("1,2\n3\n".as_bytes()).is_err());
    }
}
