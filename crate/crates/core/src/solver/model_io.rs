//! Plain-text model documents.
//!
//! Every number is written in scientific notation with 17 significant
//! digits, which round-trips `f64` exactly, so a reloaded model predicts
//! bit-identically. Landmark coordinates are stored alongside their dataset
//! indices so that a model file predicts without the training data.
//!
//! ```text
//! format mpreg-model 1
//! kind nystrom
//! kernel gaussian:4.0000000000000001e-2
//! lambda0 1.0000000000000000e-8
//! lambdas 1 1.0000000000000000e0
//! scaling times_m
//! landmarks 2 3
//! 17 <x1> <x2> <x3>
//! 42 <x1> <x2> <x3>
//! coefficients 2 1
//! <c11>
//! <c21>
//! end
//! ```
//!
//! An aggregate document has `kind aggregate`, the LFS quantities
//! (`cbar`, `hbar`, `hvec`) and then one `member` block per Nyström model.
//! Precomputed kernels are recorded by shape only; a loaded model needs the
//! caller to attach a kernel matrix before predicting.

use super::{LaplacianScaling, NystromModel, RegularizationSummary};
use crate::aggregation::{AggregatedModel, LfsWeights};
use crate::data::Points;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use nalgebra::{DMatrix, DVector};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

const HEADER: &str = "format mpreg-model 1";

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Nystrom(NystromModel),
    Aggregate(AggregatedModel),
}

impl SavedModel {
    pub fn predict(&self, query: &Points) -> Result<DMatrix<f64>> {
        match self {
            SavedModel::Nystrom(m) => m.predict(query),
            SavedModel::Aggregate(a) => a.predict(query),
        }
    }

    /// Replaces the kernel of every contained model.
    pub fn set_kernel(&mut self, kernel: KernelSpec) {
        match self {
            SavedModel::Nystrom(m) => m.kernel = kernel,
            SavedModel::Aggregate(a) => a.members.iter_mut().for_each(|m| m.kernel = kernel.clone()),
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(num).collect::<Vec<_>>().join(" ")
}

pub fn model_to_string(model: &SavedModel) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    match model {
        SavedModel::Nystrom(m) => {
            writeln!(out, "kind nystrom").unwrap();
            write_nystrom_body(&mut out, m);
        }
        SavedModel::Aggregate(a) => {
            let l = a.members.len();
            writeln!(out, "kind aggregate").unwrap();
            writeln!(out, "members {l}").unwrap();
            writeln!(out, "cbar {}", join(a.lfs.cbar.iter().copied())).unwrap();
            writeln!(out, "hvec {}", join(a.lfs.hbar_vec.iter().copied())).unwrap();
            writeln!(out, "hbar {l}").unwrap();
            for i in 0..l {
                writeln!(out, "{}", join(a.lfs.hbar.row(i).iter().copied())).unwrap();
            }
            for (i, m) in a.members.iter().enumerate() {
                writeln!(out, "member {}", i + 1).unwrap();
                write_nystrom_body(&mut out, m);
            }
        }
    }
    out
}

fn write_nystrom_body(out: &mut String, m: &NystromModel) {
    let r = &m.regularization;
    writeln!(out, "kernel {}", m.kernel).unwrap();
    writeln!(out, "lambda0 {}", num(r.lambda0)).unwrap();
    if r.lambdas.is_empty() {
        writeln!(out, "lambdas 0").unwrap();
    } else {
        writeln!(out, "lambdas {} {}", r.lambdas.len(), join(r.lambdas.iter().copied())).unwrap();
    }
    writeln!(out, "scaling {}", r.scaling).unwrap();
    let d = m.landmark_points.dim();
    writeln!(out, "landmarks {} {}", m.landmark_count(), d).unwrap();
    for (idx, row) in m.landmark_indices.iter().zip(m.landmark_points.rows()) {
        writeln!(out, "{idx} {}", join(row.iter().copied())).unwrap();
    }
    let (s, p) = m.coefficients.shape();
    writeln!(out, "coefficients {s} {p}").unwrap();
    for i in 0..s {
        writeln!(out, "{}", join(m.coefficients.row(i).iter().copied())).unwrap();
    }
    writeln!(out, "end").unwrap();
}

pub fn write_model<W: Write>(model: &SavedModel, mut w: W) -> Result<()> {
    w.write_all(model_to_string(model).as_bytes())?;
    Ok(())
}

pub fn read_model<R: BufRead>(r: R) -> Result<SavedModel> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    let mut cur = Cursor { lines: &lines, pos: 0 };
    let header = cur.next()?;
    if header.1 != HEADER {
        return Err(cur.err("missing model header"));
    }
    let kind = cur.keyed("kind")?;
    match kind.as_str() {
        "nystrom" => Ok(SavedModel::Nystrom(read_nystrom_body(&mut cur)?)),
        "aggregate" => {
            let l: usize = cur.keyed_parse("members")?;
            let cbar = cur.keyed_floats("cbar", l)?;
            let hvec = cur.keyed_floats("hvec", l)?;
            let rows: usize = cur.keyed_parse("hbar")?;
            if rows != l {
                return Err(cur.err("hbar size does not match member count"));
            }
            let mut hbar = DMatrix::zeros(l, l);
            for i in 0..l {
                let (_, line) = cur.next()?;
                let vals = cur.floats(line, l)?;
                hbar.row_mut(i).copy_from_slice(&vals);
            }
            let mut members = Vec::with_capacity(l);
            for i in 0..l {
                let tag: usize = cur.keyed_parse("member")?;
                if tag != i + 1 {
                    return Err(cur.err("member blocks out of order"));
                }
                members.push(read_nystrom_body(&mut cur)?);
            }
            Ok(SavedModel::Aggregate(AggregatedModel {
                members,
                lfs: LfsWeights {
                    hbar,
                    hbar_vec: DVector::from_vec(hvec),
                    cbar: DVector::from_vec(cbar),
                },
            }))
        }
        other => Err(cur.err(&format!("unknown model kind {other:?}"))),
    }
}

fn read_nystrom_body(cur: &mut Cursor<'_>) -> Result<NystromModel> {
    let kernel_text = cur.keyed("kernel")?;
    let kernel = if kernel_text.starts_with("precomputed") {
        KernelSpec::Precomputed(Arc::new(DMatrix::zeros(0, 0)))
    } else {
        kernel_text.parse().map_err(|e: Error| cur.err(&e.to_string()))?
    };
    let lambda0: f64 = cur.keyed_parse("lambda0")?;
    let lambdas_line = cur.keyed("lambdas")?;
    let mut parts = lambdas_line.split_whitespace();
    let count: usize = cur.parse_one(parts.next().unwrap_or(""))?;
    let lambdas = cur.floats(&parts.collect::<Vec<_>>().join(" "), count)?;
    let scaling: LaplacianScaling = cur.keyed("scaling")?.parse().map_err(|e: Error| cur.err(&e.to_string()))?;
    let dims = cur.keyed("landmarks")?;
    let (s, d) = cur.pair(&dims)?;
    let mut indices = Vec::with_capacity(s);
    let mut coords = Vec::with_capacity(s * d);
    for _ in 0..s {
        let (_, line) = cur.next()?;
        let mut it = line.splitn(2, ' ');
        indices.push(cur.parse_one::<usize>(it.next().unwrap_or(""))?);
        coords.extend(cur.floats(it.next().unwrap_or(""), d)?);
    }
    let dims = cur.keyed("coefficients")?;
    let (rows, p) = cur.pair(&dims)?;
    if rows != s {
        return Err(cur.err("coefficient rows do not match landmark count"));
    }
    let mut coefficients = DMatrix::zeros(s, p);
    for i in 0..s {
        let (_, line) = cur.next()?;
        let vals = cur.floats(line, p)?;
        coefficients.row_mut(i).copy_from_slice(&vals);
    }
    let (_, end) = cur.next()?;
    if end != "end" {
        return Err(cur.err("expected end"));
    }
    Ok(NystromModel {
        landmark_indices: indices,
        landmark_points: Points::new(coords, d).map_err(|e| cur.err(&e.to_string()))?,
        coefficients,
        kernel,
        regularization: RegularizationSummary { lambda0, lambdas, scaling },
    })
}

struct Cursor<'a> {
    lines: &'a [String],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos].trim();
            self.pos += 1;
            if !line.is_empty() && !line.starts_with('#') {
                return Ok((self.pos, line));
            }
        }
        Err(self.err("unexpected end of file"))
    }

    fn err(&self, message: &str) -> Error {
        Error::ModelFormat {
            line: self.pos,
            message: message.to_string(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let (_, line) = self.next()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.trim().to_string()),
            None if line == key => Ok(String::new()),
            _ => Err(self.err(&format!("expected `{key}`"))),
        }
    }

    fn keyed_parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.keyed(key)?;
        self.parse_one(&v)
    }

    fn keyed_floats(&mut self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let v = self.keyed(key)?;
        self.floats(&v, expected)
    }

    fn parse_one<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.trim().parse().map_err(|_| self.err(&format!("cannot parse {s:?}")))
    }

    fn pair(&self, s: &str) -> Result<(usize, usize)> {
        let mut it = s.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => Ok((self.parse_one(a)?, self.parse_one(b)?)),
            _ => Err(self.err("expected two sizes")),
        }
    }

    fn floats(&self, s: &str, expected: usize) -> Result<Vec<f64>> {
        let vals: Vec<f64> = s.split_whitespace().map(|t| self.parse_one(t)).collect::<Result<_>>()?;
        if vals.len() != expected {
            return Err(self.err(&format!("expected {expected} values, found {}", vals.len())));
        }
        Ok(vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::aggregate_lfs;
    use crate::data::Dataset;
    use crate::solver::{fit_nystrom, RegularizationConfig};
    use proptest::prelude::*;

    fn toy() -> (Dataset, KernelSpec) {
        let x = Points::new((0..12).map(|i| (i as f64 * 0.37).sin()).collect(), 2).unwrap();
        let y = DMatrix::from_row_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        (Dataset::new(x, y).unwrap(), KernelSpec::gaussian(0.7).unwrap())
    }

    #[test]
    fn nystrom_round_trip_is_bit_identical() {
        let (d, k) = toy();
        let model = fit_nystrom(&d, &[0, 2, 5], &k, &RegularizationConfig::new(1e-3)).unwrap();
        let saved = SavedModel::Nystrom(model);
        let text = model_to_string(&saved);
        let back = read_model(text.as_bytes()).unwrap();
        assert_eq!(back, saved);
        assert_eq!(back.predict(d.points()).unwrap(), saved.predict(d.points()).unwrap());
    }

    #[test]
    fn aggregate_round_trip() {
        let (d, k) = toy();
        let cfg = RegularizationConfig::new(1e-2);
        let members = vec![
            fit_nystrom(&d, &[1], &k, &cfg).unwrap(),
            fit_nystrom(&d, &[0, 3, 4], &k, &cfg).unwrap(),
        ];
        let saved = SavedModel::Aggregate(aggregate_lfs(members, &d).unwrap());
        let back = read_model(model_to_string(&saved).as_bytes()).unwrap();
        assert_eq!(back, saved);
    }

    #[test]
    fn malformed_documents_fail() {
        assert!(read_model("kind nystrom\n".as_bytes()).is_err());
        let (d, k) = toy();
        let model = fit_nystrom(&d, &[0, 2], &k, &RegularizationConfig::new(1e-3)).unwrap();
        let text = model_to_string(&SavedModel::Nystrom(model));
        let truncated: String = text.lines().take(9).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_model(truncated.as_bytes()), Err(Error::ModelFormat { .. })));
    }

    proptest! {
        #[test]
        fn numbers_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = num(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
