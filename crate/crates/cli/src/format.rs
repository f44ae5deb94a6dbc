use nalgebra::DMatrix;
use std::fmt::Write;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn machine(v: f64) -> String {
    format!("{v:.16e}")
}

/// 4 significant digits for tables meant to be read.
pub fn human(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-3..5).contains(&mag) {
        format!("{:.*}", (3 - mag).max(0) as usize, v)
    } else {
        format!("{v:.3e}")
    }
}

/// Rows of a matrix as CSV with a `prefix1..prefixP` header.
pub fn matrix_csv(prefix: &str, values: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=values.ncols()).map(|j| format!("{prefix}{j}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in values.row_iter() {
        let cells: Vec<String> = row.iter().map(|&v| machine(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Left-aligned text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}
