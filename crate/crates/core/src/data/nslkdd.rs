//! NSL-KDD preprocessing: categorical encoding, removal of all-zero columns,
//! min-max scaling and ±1 attack labels.

use super::{Dataset, Points};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

/// Attributes per record, excluding the class and difficulty fields.
pub const NSLKDD_ATTRIBUTES: usize = 41;

const PROTOCOL_COL: usize = 1;
const SERVICE_COL: usize = 2;
const FLAG_COL: usize = 3;
const PROTOCOLS: [&str; 3] = ["tcp", "udp", "icmp"];

/// Reads raw comma-separated records, keeping at most `limit` rows.
pub fn read_raw_rows(path: impl AsRef<Path>, limit: Option<usize>) -> Result<Vec<Vec<String>>> {
    parse_raw(std::fs::File::open(path)?, limit)
}

pub(crate) fn parse_raw<R: Read>(reader: R, limit: Option<usize>) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        if limit.is_some_and(|l| rows.len() >= l) {
            break;
        }
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

/// Ordinal codes for the three categorical attributes. Protocol uses the
/// fixed map tcp/udp/icmp → 0/1/2; service and flag use the index of the
/// value among the sorted distinct values seen at fit time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NslKddEncoder {
    pub services: Vec<String>,
    pub flags: Vec<String>,
}

impl NslKddEncoder {
    pub fn fit(rows: &[Vec<String>]) -> Result<Self> {
        let mut services = BTreeSet::new();
        let mut flags = BTreeSet::new();
        for (i, row) in rows.iter().enumerate() {
            check_width(i, row)?;
            services.insert(row[SERVICE_COL].clone());
            flags.insert(row[FLAG_COL].clone());
        }
        Ok(Self {
            services: services.into_iter().collect(),
            flags: flags.into_iter().collect(),
        })
    }

    /// Encodes rows into `n × 41` raw attribute values and ±1 labels.
    pub fn encode(&self, rows: &[Vec<String>]) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let mut x = DMatrix::zeros(rows.len(), NSLKDD_ATTRIBUTES);
        let mut y = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            check_width(i, row)?;
            for c in 0..NSLKDD_ATTRIBUTES {
                let field = &row[c];
                x[(i, c)] = match c {
                    PROTOCOL_COL => code(&PROTOCOLS, field, c)?,
                    SERVICE_COL => code(&self.services, field, c)?,
                    FLAG_COL => code(&self.flags, field, c)?,
                    _ => field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                        row: i + 1,
                        column: c + 1,
                        message: format!("not a number: {field:?}"),
                    })?,
                };
            }
            y.push(if row[NSLKDD_ATTRIBUTES] == "normal" { -1.0 } else { 1.0 });
        }
        Ok((x, y))
    }

    /// Two-column `column:value,code` listing of every categorical code.
    pub fn encoding_map(&self) -> String {
        let mut out = String::new();
        let tables: [(&str, Vec<&str>); 3] = [
            ("protocol_type", PROTOCOLS.to_vec()),
            ("service", self.services.iter().map(String::as_str).collect()),
            ("flag", self.flags.iter().map(String::as_str).collect()),
        ];
        for (name, values) in tables {
            for (code, v) in values.iter().enumerate() {
                out.push_str(&format!("{name}:{v},{code}\n"));
            }
        }
        out
    }
}

fn check_width(i: usize, row: &[String]) -> Result<()> {
    if row.len() < NSLKDD_ATTRIBUTES + 1 || row.len() > NSLKDD_ATTRIBUTES + 2 {
        return Err(Error::Parse {
            row: i + 1,
            column: row.len(),
            message: format!("expected 42 or 43 fields, found {}", row.len()),
        });
    }
    Ok(())
}

fn code<S: AsRef<str>>(table: &[S], value: &str, column: usize) -> Result<f64> {
    table
        .iter()
        .position(|s| s.as_ref() == value)
        .map(|p| p as f64)
        .ok_or_else(|| Error::UnknownCategory {
            column: column + 1,
            value: value.to_string(),
        })
}

/// Per-column min-max map to `[0, 1]`; constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyInput("scaler fit data"));
        }
        let min = x.column_iter().map(|c| c.min()).collect();
        let max = x.column_iter().map(|c| c.max()).collect();
        Ok(Self { min, max })
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                found: x.ncols(),
            });
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            let range = self.max[j] - self.min[j];
            if range > 0.0 {
                (x[(i, j)] - self.min[j]) / range
            } else {
                0.0
            }
        }))
    }
}

#[derive(Debug, Clone)]
pub struct NslKddPreprocessed {
    /// All rows, every row labeled.
    pub dataset: Dataset,
    pub encoder: NslKddEncoder,
    /// Indices of the retained raw attributes.
    pub kept_columns: Vec<usize>,
    pub scaler: MinMaxScaler,
}

/// Encodes every row, then drops all-zero attributes and fits the scaler on
/// the first `fit_rows` rows (the training partition) only.
pub fn preprocess_nslkdd(rows: &[Vec<String>], fit_rows: usize) -> Result<NslKddPreprocessed> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("nsl-kdd rows"));
    }
    if fit_rows == 0 || fit_rows > rows.len() {
        return Err(Error::InvalidParameter(format!(
            "training partition of {fit_rows} rows out of {}",
            rows.len()
        )));
    }
    let encoder = NslKddEncoder::fit(rows)?;
    let (raw, labels) = encoder.encode(rows)?;
    let train = raw.rows(0, fit_rows);
    let kept_columns: Vec<usize> = (0..NSLKDD_ATTRIBUTES).filter(|&c| train.column(c).iter().any(|&v| v != 0.0)).collect();
    let kept = raw.select_columns(&kept_columns);
    let scaler = MinMaxScaler::fit(&kept.rows(0, fit_rows).into_owned())?;
    let scaled = scaler.transform(&kept)?;
    let n = labels.len();
    let dataset = Dataset::new(Points::from_matrix(&scaled)?, DMatrix::from_column_slice(n, 1, &labels))?;
    Ok(NslKddPreprocessed {
        dataset,
        encoder,
        kept_columns,
        scaler,
    })
}
