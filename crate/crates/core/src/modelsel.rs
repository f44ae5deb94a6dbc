//! Spectral diagnostics, theoretical parameter rules, subsample-size
//! recommendations and grid-search parameter selection.
//!
//! Diagnostics use the empirical integral operator `L_K ≈ K/n`.

use crate::data::{kfold_split, Dataset, FoldScheme};
use crate::error::{Error, Result};
use crate::eval::{error_rate, mean_squared_error};
use crate::kernels::{gram, KernelSpec};
use crate::linalg::relative_asymmetry;
use crate::solver::{fit_nystrom, select_landmarks, FitSpec, FullModel, LandmarkSelection};
use nalgebra::{DMatrix, DVector};
use std::io::Write;

/// Relative asymmetry tolerated in a Gram matrix handed to diagnostics.
const GRAM_SYMMETRY_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff for the `K_ss` pseudoinverse.
const GAP_CUTOFF: f64 = 1e-11;
/// Rounding slack in closed-form inequality checks.
const FORMULA_SLACK: f64 = 1e-12;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")))
    }
}

fn check_gram(k: &DMatrix<f64>) -> Result<()> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            found: k.ncols(),
        });
    }
    if k.nrows() == 0 {
        return Err(Error::EmptyInput("gram matrix"));
    }
    let relative = relative_asymmetry(k);
    if relative > GRAM_SYMMETRY_TOL {
        return Err(Error::Asymmetric { relative });
    }
    Ok(())
}

/// Eigenpairs of `K/n` with negative round-off eigenvalues clipped to zero.
fn scaled_spectrum(k: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_gram(k)?;
    let n = k.nrows() as f64;
    let sym = (k + k.transpose()) * (0.5 / n);
    let eig = sym.symmetric_eigen();
    Ok((eig.eigenvalues.map(|v| v.max(0.0)), eig.eigenvectors))
}

/// `N̂(γ) = Σ σ_i / (σ_i + γ)` over the eigenvalues `σ_i` of `K/n`.
pub fn effective_dimension(k: &DMatrix<f64>, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let (sigma, _) = scaled_spectrum(k)?;
    Ok(sigma.iter().map(|s| s / (s + gamma)).sum())
}

/// Ridge leverage scores `[K (K + nγI)⁻¹]_ii`; they sum to `N̂(γ)`.
pub fn point_leverage(k: &DMatrix<f64>, gamma: f64) -> Result<DVector<f64>> {
    check_gamma(gamma)?;
    let (sigma, q) = scaled_spectrum(k)?;
    let weights: Vec<f64> = sigma.iter().map(|s| s / (s + gamma)).collect();
    Ok(DVector::from_fn(q.nrows(), |i, _| {
        q.row(i).iter().zip(&weights).map(|(v, w)| v * v * w).sum()
    }))
}

/// `N_∞(γ) ≈ n · max_i leverage_i`, the empirical supremum of `N_x(γ)`.
pub fn max_point_dimension(k: &DMatrix<f64>, gamma: f64) -> Result<f64> {
    let lev = point_leverage(k, gamma)?;
    Ok(k.nrows() as f64 * lev.max())
}

/// `Δ̂_s² = λ_max((K_nn − K_ns K_ss† K_nsᵀ)/n)`, clipped at zero.
pub fn nystrom_gap(k_nn: &DMatrix<f64>, k_ns: &DMatrix<f64>, k_ss: &DMatrix<f64>) -> Result<f64> {
    check_gram(k_nn)?;
    let n = k_nn.nrows();
    let s = k_ss.nrows();
    if k_ns.shape() != (n, s) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k_ns.nrows(),
        });
    }
    if !k_ss.is_square() {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: k_ss.ncols(),
        });
    }
    // K_ss† = U Λ⁻¹ Uᵀ applied in factored form: forming B = K_ns U Λ^{-1/2}
    // loses far less accuracy than multiplying through the explicit inverse
    let eig = ((k_ss + k_ss.transpose()) * 0.5).symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let kept: Vec<usize> = (0..s).filter(|&i| eig.eigenvalues[i] > GAP_CUTOFF * top).collect();
    let mut b = k_ns * eig.eigenvectors.select_columns(&kept);
    for (col, &i) in kept.iter().enumerate() {
        b.column_mut(col).scale_mut(eig.eigenvalues[i].sqrt().recip());
    }
    let schur = k_nn - &b * b.transpose();
    let schur = (&schur + schur.transpose()) * (0.5 / n as f64);
    let top = schur.symmetric_eigen().eigenvalues.max();
    Ok(top.max(0.0))
}

/// [`nystrom_gap`] with the blocks taken from a kernel over `data`.
pub fn nystrom_gap_for(kernel: &KernelSpec, data: &Dataset, landmarks: &[usize]) -> Result<f64> {
    if landmarks.is_empty() {
        return Err(Error::EmptyLandmarks);
    }
    let all: Vec<usize> = (0..data.len()).collect();
    let k_nn = gram(kernel, data, &all, &all)?.values;
    let k_ns = k_nn.select_columns(landmarks);
    let k_ss = k_ns.select_rows(landmarks);
    nystrom_gap(&k_nn, &k_ns, &k_ss)
}

/// `κ² = max_i K(x_i, x_i)`.
pub fn kappa_sq(kernel: &KernelSpec, data: &Dataset) -> Result<f64> {
    let mut best = 0.0f64;
    for i in 0..data.len() {
        let x = data.points().row(i);
        best = best.max(kernel.eval(x, x)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRuleConfig {
    /// Hölder exponent of the source condition, `φ(t) = t^r`.
    pub r: f64,
    /// Eigenvalue decay exponent, when known.
    pub b: Option<f64>,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleLambdas {
    pub lambda0: f64,
    /// Weight of every graph penalty, `λ₀^{3/2} φ(λ₀)`.
    pub lambda_j: f64,
}

/// A priori parameter choice: `λ₀ = Θ⁻¹(m^{−1/2}) = m^{−1/(2r+2)}` with
/// `Θ(t) = t φ(t)`, or `λ₀ = Ψ⁻¹(m^{−1/2}) = m^{−b/(2br+b+1)}` with
/// `Ψ(t) = t^{1/2+1/(2b)} φ(t)` when the decay exponent is known.
pub fn parameter_rule(cfg: &RateRuleConfig) -> Result<RuleLambdas> {
    if !(0.0..=1.0).contains(&cfg.r) {
        return Err(Error::InvalidParameter(format!("r must lie in [0, 1], got {}", cfg.r)));
    }
    if cfg.m < 2 {
        return Err(Error::InvalidParameter(format!("sample size must be at least 2, got {}", cfg.m)));
    }
    let exponent = match cfg.b {
        None => 1.0 / (2.0 * cfg.r + 2.0),
        Some(b) if b > 1.0 && b.is_finite() => b / (2.0 * b * cfg.r + b + 1.0),
        Some(b) => return Err(Error::InvalidParameter(format!("decay exponent must exceed 1, got {b}"))),
    };
    let lambda0 = (cfg.m as f64).powf(-exponent).min(1.0);
    Ok(RuleLambdas {
        lambda0,
        lambda_j: lambda0.powf(1.5 + cfg.r),
    })
}

/// Sample condition `8κ²/√m · log(4/η) ≤ λ₀`.
pub fn check_sample_condition(m: usize, kappa_sq: f64, lambda0: f64, eta: f64) -> bool {
    let lhs = 8.0 * kappa_sq / (m as f64).sqrt() * (4.0 / eta).ln();
    lhs <= lambda0 * (1.0 + FORMULA_SLACK)
}

/// `s ≥ max{67, 5 N_∞} · log(12κ²/(λ₀δ))`, rounded up and at least 1.
pub fn recommend_subsample_size(lambda0: f64, delta: f64, kappa_sq: f64, n_inf: f64) -> Result<usize> {
    for (name, v) in [("lambda0", lambda0), ("delta", delta), ("kappa_sq", kappa_sq)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if !(n_inf.is_finite() && n_inf >= 0.0) {
        return Err(Error::InvalidParameter(format!("N_inf must be nonnegative, got {n_inf}")));
    }
    let log_term = (12.0 * kappa_sq / (lambda0 * delta)).ln();
    let bound = (67.0 * log_term).max(5.0 * n_inf * log_term);
    let rounded = (bound - FORMULA_SLACK * bound.abs().max(1.0)).ceil();
    Ok(if rounded < 1.0 { 1 } else { rounded as usize })
}

/// Least-squares slope `b̂` of `log σ_i` against `−log i` over the leading
/// eigenvalues of `K/n` above `floor·σ_1`.
pub fn estimate_decay_exponent(k: &DMatrix<f64>, floor: f64) -> Result<f64> {
    let (sigma, _) = scaled_spectrum(k)?;
    let mut desc: Vec<f64> = sigma.iter().copied().collect();
    desc.sort_by(|a, b| b.total_cmp(a));
    let top = desc[0];
    let pts: Vec<(f64, f64)> = desc
        .iter()
        .enumerate()
        .take_while(|(_, &s)| s > floor * top && s > 0.0)
        .map(|(i, &s)| (((i + 1) as f64).ln(), s.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("too few eigenvalues above the floor".into()));
    }
    Ok(-least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub gamma: f64,
    pub effective_dimension: f64,
    pub leverages: DVector<f64>,
    /// `Δ̂_s²`, when landmarks were supplied.
    pub nystrom_gap_sq: Option<f64>,
    pub kappa_sq: f64,
    /// Sample condition evaluated at `λ₀ = γ`.
    pub sample_condition_ok: bool,
}

/// All diagnostics at one `γ` over the labeled and unlabeled points of
/// `data`; the sample condition uses the labeled count.
pub fn diagnose(kernel: &KernelSpec, data: &Dataset, gamma: f64, landmarks: Option<&[usize]>, eta: f64) -> Result<DiagnosticsReport> {
    let all: Vec<usize> = (0..data.len()).collect();
    let k = gram(kernel, data, &all, &all)?.values;
    let leverages = point_leverage(&k, gamma)?;
    let nystrom_gap_sq = match landmarks {
        Some([]) => return Err(Error::EmptyLandmarks),
        Some(l) => {
            let k_ns = k.select_columns(l);
            Some(nystrom_gap(&k, &k_ns, &k_ns.select_rows(l))?)
        }
        None => None,
    };
    let kappa_sq = k.diagonal().max();
    Ok(DiagnosticsReport {
        gamma,
        effective_dimension: effective_dimension(&k, gamma)?,
        leverages,
        nystrom_gap_sq,
        kappa_sq,
        sample_condition_ok: check_sample_condition(data.labeled(), kappa_sq, gamma, eta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Misclassification rate of the sign (or argmax) decision.
    Classification,
    /// Mean squared error.
    Regression,
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lambda0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    /// Nyström landmark count per fold; `None` fits the full solution.
    pub landmarks: Option<usize>,
    pub task: Task,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvRow {
    pub lambda0: f64,
    pub lambda1: f64,
    /// One-based fold number.
    pub fold: usize,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub lambda0: f64,
    pub lambda1: f64,
    pub mean_metric: f64,
    pub table: Vec<CvRow>,
}

fn sorted_grid(values: &[f64], name: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("empty {name} grid")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// K-fold search over `λ₀ × λ₁` on the labeled rows. Unlabeled rows join
/// every training set. Ties in the mean metric go to the smallest `λ₀`,
/// then the smallest `λ₁`.
pub fn grid_search(data: &Dataset, base: &FitSpec, grid: &GridSpec) -> Result<GridResult> {
    let lambda0s = sorted_grid(&grid.lambda0, "lambda0")?;
    let lambda1s = sorted_grid(&grid.lambda1, "lambda1")?;
    let m = data.labeled();
    if m == 0 {
        return Err(Error::NoLabels);
    }
    let folds = kfold_split(m, grid.folds, FoldScheme::Shuffled(grid.seed))?;
    let unlabeled: Vec<usize> = (m..data.len()).collect();

    let cells = lambda0s.len() * lambda1s.len();
    let mut sums = vec![0.0; cells];
    let mut table = Vec::with_capacity(cells * folds.len());
    for (f, fold) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = fold.train.iter().chain(&unlabeled).copied().collect();
        let train = data.select(&train_idx, fold.train.len())?;
        let test = data.select(&fold.test, fold.test.len())?;
        let penalty = base.penalty(&train)?;
        let landmarks = match grid.landmarks {
            Some(s) => Some(select_landmarks(
                train.len(),
                LandmarkSelection::Uniform {
                    size: s.min(train.len()),
                    seed: grid.seed.wrapping_add(f as u64),
                },
            )?),
            None => None,
        };
        for (a, &l0) in lambda0s.iter().enumerate() {
            for (b, &l1) in lambda1s.iter().enumerate() {
                let spec = FitSpec {
                    lambda0: l0,
                    lambda1: l1,
                    ..base.clone()
                };
                let config = spec.config_with(penalty.as_ref());
                let scores = match &landmarks {
                    Some(l) => fit_nystrom(&train, l, &spec.kernel, &config)?.predict(test.points())?,
                    None => FullModel::fit(&train, &spec.kernel, &config)?.predict(test.points())?,
                };
                let metric = match grid.task {
                    Task::Classification => error_rate(&scores, test.labels())?,
                    Task::Regression => mean_squared_error(&scores, test.labels())?,
                };
                sums[a * lambda1s.len() + b] += metric;
                table.push(CvRow {
                    lambda0: l0,
                    lambda1: l1,
                    fold: f + 1,
                    metric,
                });
            }
        }
    }
    let k = folds.len() as f64;
    let mut best = 0;
    for cell in 1..cells {
        if sums[cell] < sums[best] {
            best = cell;
        }
    }
    Ok(GridResult {
        lambda0: lambda0s[best / lambda1s.len()],
        lambda1: lambda1s[best % lambda1s.len()],
        mean_metric: sums[best] / k,
        table,
    })
}

/// CSV with columns `lambda0,lambda1,fold,metric`, 17 significant digits.
pub fn write_cv_table<W: Write>(rows: &[CvRow], mut w: W) -> Result<()> {
    writeln!(w, "lambda0,lambda1,fold,metric")?;
    for r in rows {
        writeln!(w, "{:.16e},{:.16e},{},{:.16e}", r.lambda0, r.lambda1, r.fold, r.metric)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Points;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &a * a.transpose()
    }

    #[test]
    fn identity_operator() {
        let k = DMatrix::identity(4, 4) * 4.0;
        assert!((effective_dimension(&k, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let lev = point_leverage(&k, 1.0).unwrap();
        assert!(lev.iter().all(|&l| (l - 0.5).abs() < 1e-15));
    }

    #[test]
    fn huge_gamma_vanishes() {
        let k = random_psd(5, 1);
        assert!(effective_dimension(&k, 1e12).unwrap() <= 1e-6);
    }

    #[test]
    fn effective_dimension_matches_characteristic_roots() {
        // independent route: N̂(γ) = tr(K (K + nγI)⁻¹) by a dense solve
        let k = random_psd(6, 2);
        let gamma = 0.07;
        let shifted = &k + DMatrix::identity(6, 6) * (6.0 * gamma);
        let want = (&k * shifted.try_inverse().unwrap()).trace();
        assert!((effective_dimension(&k, gamma).unwrap() - want).abs() < 1e-10);
        let lev = point_leverage(&k, gamma).unwrap();
        assert!((lev.sum() - want).abs() < 1e-10);
    }

    #[test]
    fn duplicated_points_share_leverage() {
        let x = Points::new(vec![0.0, 0.3, 0.3, 0.9], 1).unwrap();
        let data = Dataset::new(x, DMatrix::zeros(0, 1)).unwrap();
        let k = gram(&KernelSpec::gaussian(1.0).unwrap(), &data, &[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap().values;
        let lev = point_leverage(&k, 0.01).unwrap();
        assert!((lev[1] - lev[2]).abs() < 1e-12);
    }

    #[test]
    fn gap_cases() {
        let k = random_psd(6, 3);
        let all: Vec<usize> = (0..6).collect();
        let k_ns = k.select_columns(&all);
        assert!(nystrom_gap(&k, &k_ns, &k).unwrap() <= 1e-10);

        let a = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let k1 = &a * a.transpose();
        let cols = k1.select_columns(&[1]);
        assert!(nystrom_gap(&k1, &cols, &cols.select_rows(&[1])).unwrap() <= 1e-12);

        // dense Schur complement with an explicit inverse
        let l = [1usize, 4];
        let k_ns = k.select_columns(&l);
        let k_ss = k_ns.select_rows(&l);
        let schur = &k - &k_ns * k_ss.clone().try_inverse().unwrap() * k_ns.transpose();
        let want = schur.symmetric_eigen().eigenvalues.max() / 6.0;
        assert!((nystrom_gap(&k, &k_ns, &k_ss).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn rule_examples() {
        let a = parameter_rule(&RateRuleConfig { r: 0.5, b: None, m: 10_000 }).unwrap();
        assert!((a.lambda0 - 10f64.powf(-4.0 / 3.0)).abs() < 1e-15);
        assert!((a.lambda0 - 0.046416).abs() < 1e-6);
        let b = parameter_rule(&RateRuleConfig { r: 0.5, b: Some(2.0), m: 10_000 }).unwrap();
        assert!((b.lambda0 - 0.025119).abs() < 1e-6);
        let c = parameter_rule(&RateRuleConfig { r: 0.0, b: None, m: 400 }).unwrap();
        assert!((c.lambda0 - 0.05).abs() < 1e-15);
        assert!((c.lambda_j - 0.05f64.powf(1.5)).abs() < 1e-15);
        assert!(parameter_rule(&RateRuleConfig { r: 1.5, b: None, m: 10 }).is_err());
        assert!(parameter_rule(&RateRuleConfig { r: 0.5, b: Some(1.0), m: 10 }).is_err());
    }

    #[test]
    fn rule_inverts_index_functions() {
        // Θ(λ₀) = λ₀^{1+r} and Ψ(λ₀) = λ₀^{1/2+1/(2b)+r} must equal m^{-1/2}
        for &(r, m) in &[(0.25, 500usize), (0.75, 20_000)] {
            let l = parameter_rule(&RateRuleConfig { r, b: None, m }).unwrap().lambda0;
            assert!((l.powf(1.0 + r) - (m as f64).powf(-0.5)).abs() < 1e-12);
            let b = 3.0;
            let l = parameter_rule(&RateRuleConfig { r, b: Some(b), m }).unwrap().lambda0;
            assert!((l.powf(0.5 + 0.5 / b + r) - (m as f64).powf(-0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_condition_boundary() {
        let eta = 4.0 / std::f64::consts::E;
        assert!(check_sample_condition(64, 1.0, 1.0, eta));
        assert!(!check_sample_condition(64, 1.0, 0.5, eta));
    }

    #[test]
    fn subsample_size_examples() {
        assert_eq!(recommend_subsample_size(1.0, 12.0, 1.0, 3.0).unwrap(), 1);
        // log term 2: 12κ²/(λ₀δ) = e²
        let delta = 12.0 / std::f64::consts::E.powi(2);
        assert_eq!(recommend_subsample_size(1.0, delta, 1.0, 10.0).unwrap(), 134);
        assert!(recommend_subsample_size(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn decay_of_power_spectrum() {
        let n = 40;
        let k = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| n as f64 * ((i + 1) as f64).powf(-2.5)));
        assert!((estimate_decay_exponent(&k, 1e-12).unwrap() - 2.5).abs() < 1e-10);
    }

    #[test]
    fn single_point_grid() {
        let x = Points::new((0..20).map(|i| i as f64 / 20.0).collect(), 1).unwrap();
        let y = DMatrix::from_fn(20, 1, |i, _| if i < 10 { -1.0 } else { 1.0 });
        let data = Dataset::new(x, y).unwrap();
        let spec = FitSpec::new(KernelSpec::gaussian(10.0).unwrap(), 1e-3);
        let grid = GridSpec {
            lambda0: vec![0.5],
            lambda1: vec![0.0],
            folds: 4,
            seed: 1,
            landmarks: Some(5),
            task: Task::Classification,
        };
        let res = grid_search(&data, &spec, &grid).unwrap();
        assert_eq!((res.lambda0, res.lambda1), (0.5, 0.0));
        assert_eq!(res.table.len(), 4);
        let mut out = Vec::new();
        write_cv_table(&res.table, &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("lambda0,lambda1,fold,metric\n"));
    }
}
