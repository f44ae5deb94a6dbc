//! Confusion-matrix metrics, the cross-validation driver and the empirical
//! convergence-rate harness.

use crate::aggregation::lfs_from_predictions;
use crate::data::{gen_synthetic, kfold_split, paper_protocol, Dataset, Fold, FoldScheme, Points, SyntheticTarget};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::modelsel::{least_squares_slope, parameter_rule, RateRuleConfig};
use crate::solver::{fit_nystrom, select_landmarks, FitSpec, FullModel, LandmarkSelection, LaplacianScaling, RegularizationConfig};
use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

/// Decision rule: `+1` when `f(x) ≥ 0`, else `−1`.
pub fn decide(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Counts with the positive class `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

fn check_sign(v: f64, what: &'static str) -> Result<bool> {
    if v == 1.0 {
        Ok(true)
    } else if v == -1.0 {
        Ok(false)
    } else {
        Err(Error::InvalidParameter(format!("{what} must be +1 or -1, got {v}")))
    }
}

/// Confusion counts of `±1` predictions against `±1` labels.
pub fn confusion(predictions: &[f64], labels: &[f64]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: predictions.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        match (check_sign(p, "prediction")?, check_sign(y, "label")?) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fn_ += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// [`confusion`] after applying the decision rule to raw scores.
pub fn confusion_from_scores(scores: &[f64], labels: &[f64]) -> Result<ConfusionMatrix> {
    let decided: Vec<f64> = scores.iter().map(|&s| decide(s)).collect();
    confusion(&decided, labels)
}

/// Exact metric values; `None` where the denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub accuracy: Option<Ratio<u64>>,
    pub precision: Option<Ratio<u64>>,
    pub sensitivity: Option<Ratio<u64>>,
    pub specificity: Option<Ratio<u64>>,
    pub f_measure: Option<Ratio<u64>>,
}

fn ratio(num: u64, den: u64) -> Option<Ratio<u64>> {
    (den > 0).then(|| Ratio::new(num, den))
}

pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let ConfusionMatrix { tp, fn_, fp, tn } = *cm;
    Metrics {
        accuracy: ratio(tp + tn, cm.total()),
        precision: ratio(tp, tp + fp),
        sensitivity: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
        f_measure: ratio(2 * tp, 2 * tp + fn_ + fp),
    }
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_shapes(scores: &DMatrix<f64>, labels: &DMatrix<f64>) -> Result<()> {
    if scores.shape() != labels.shape() {
        return Err(Error::DimensionMismatch {
            expected: labels.nrows(),
            found: scores.nrows(),
        });
    }
    if labels.nrows() == 0 {
        return Err(Error::EmptyInput("evaluation labels"));
    }
    Ok(())
}

fn argmax(row: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in row.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Fraction of misclassified rows: the sign rule for one output, the argmax
/// rule (lowest index on ties) for several.
pub fn error_rate(scores: &DMatrix<f64>, labels: &DMatrix<f64>) -> Result<f64> {
    check_shapes(scores, labels)?;
    let n = labels.nrows();
    let wrong = if labels.ncols() == 1 {
        (0..n).filter(|&i| decide(scores[(i, 0)]) != decide(labels[(i, 0)])).count()
    } else {
        (0..n)
            .filter(|&i| argmax(scores.row(i).iter().copied()) != argmax(labels.row(i).iter().copied()))
            .count()
    };
    Ok(wrong as f64 / n as f64)
}

pub fn mean_squared_error(scores: &DMatrix<f64>, labels: &DMatrix<f64>) -> Result<f64> {
    check_shapes(scores, labels)?;
    Ok((scores - labels).norm_squared() / labels.len() as f64)
}

/// Accuracy of single-output scores against `±1` labels, exactly.
pub fn accuracy(scores: &DMatrix<f64>, labels: &DMatrix<f64>) -> Result<Ratio<u64>> {
    check_shapes(scores, labels)?;
    if labels.ncols() != 1 {
        return Err(Error::InvalidParameter("accuracy needs a single output".into()));
    }
    let cm = confusion_from_scores(scores.as_slice(), labels.as_slice())?;
    metrics(&cm).accuracy.ok_or(Error::EmptyInput("evaluation labels"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvProtocol {
    /// Sequential blocks; each of the first `k − 1` trains alone and the last
    /// block is the common test set.
    PaperSequential { k: usize },
    /// Standard k-fold over the labeled rows.
    KFold { k: usize, scheme: FoldScheme },
}

impl fmt::Display for CvProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CvProtocol::PaperSequential { .. } => f.write_str("paper_sequential"),
            CvProtocol::KFold { .. } => f.write_str("kfold"),
        }
    }
}

impl CvProtocol {
    pub fn folds(&self, m: usize) -> Result<Vec<Fold>> {
        match *self {
            CvProtocol::PaperSequential { k } => paper_protocol(m, k),
            CvProtocol::KFold { k, scheme } => kfold_split(m, k, scheme),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CvConfig {
    pub spec: FitSpec,
    pub protocol: CvProtocol,
    pub subsample_sizes: Vec<usize>,
    /// Landmark draws per fold and size.
    pub redraws: usize,
    pub seed: u64,
    pub include_full: bool,
    /// Adds the LFS aggregate of the Nyström members of each draw.
    pub aggregate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EstimatorKind {
    Full,
    Nystrom(usize),
    Aggregated,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::Full => f.write_str("full"),
            EstimatorKind::Nystrom(s) => write!(f, "nystrom_s{s}"),
            EstimatorKind::Aggregated => f.write_str("lfs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCell {
    /// One-based fold number.
    pub fold: usize,
    pub estimator: EstimatorKind,
    /// Accuracy per landmark draw (a single entry for the full estimator).
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// For the aggregate: whether its training proxy stayed at or below the
    /// best member's in every draw.
    pub proxy_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvTable {
    pub protocol: CvProtocol,
    pub cells: Vec<CvCell>,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn cell(fold: usize, estimator: EstimatorKind, accuracies: Vec<f64>, proxy_ok: Option<bool>) -> CvCell {
    let (mean, std) = mean_std(&accuracies);
    CvCell {
        fold,
        estimator,
        accuracies,
        mean,
        std,
        proxy_ok,
    }
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub(crate) fn mix_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut z = seed;
    for &p in parts {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Training set of a fold: its labeled rows followed by every unlabeled row.
pub fn fold_training_set(data: &Dataset, fold: &Fold) -> Result<Dataset> {
    let idx: Vec<usize> = fold.train.iter().copied().chain(data.labeled()..data.len()).collect();
    data.select(&idx, fold.train.len())
}

/// Accuracy table over folds, subsample sizes and landmark draws. Folds are
/// taken over the labeled rows; unlabeled rows join every training set.
pub fn run_cv(data: &Dataset, config: &CvConfig) -> Result<CvTable> {
    if data.outputs() != 1 {
        return Err(Error::InvalidParameter("cross-validation expects binary ±1 labels".into()));
    }
    if config.redraws == 0 {
        return Err(Error::InvalidParameter("at least one landmark draw is required".into()));
    }
    let folds = config.protocol.folds(data.labeled())?;
    let mut sizes = config.subsample_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut cells = Vec::new();
    for (f, fold) in folds.iter().enumerate() {
        let train = fold_training_set(data, fold)?;
        let test = data.select(&fold.test, fold.test.len())?;
        let reg = config.spec.config(&train)?;
        if config.include_full {
            let scores = FullModel::fit(&train, &config.spec.kernel, &reg)?.predict(test.points())?;
            cells.push(cell(f + 1, EstimatorKind::Full, vec![ratio_to_f64(accuracy(&scores, test.labels())?)], None));
        }
        let mut per_size: Vec<Vec<f64>> = vec![Vec::with_capacity(config.redraws); sizes.len()];
        let mut agg = Vec::new();
        let mut proxy_ok = true;
        for r in 0..config.redraws {
            let mut train_preds = Vec::with_capacity(sizes.len());
            let mut test_preds = Vec::with_capacity(sizes.len());
            for (j, &s) in sizes.iter().enumerate() {
                let seed = mix_seed(config.seed, &[f as u64, s as u64, r as u64]);
                let landmarks = select_landmarks(train.len(), LandmarkSelection::Uniform { size: s, seed })?;
                let model = fit_nystrom(&train, &landmarks, &config.spec.kernel, &reg)?;
                let scores = model.predict(test.points())?;
                per_size[j].push(ratio_to_f64(accuracy(&scores, test.labels())?));
                if config.aggregate {
                    train_preds.push(model.predict(train.points())?);
                    test_preds.push(scores);
                }
            }
            if config.aggregate && !sizes.is_empty() {
                let lfs = lfs_from_predictions(&train_preds, train.labels())?;
                let best = lfs.best_member_proxy();
                proxy_ok &= lfs.proxy_at_optimum() <= best + 1e-12 * best.abs().max(1.0);
                let scores = lfs.combine(&test_preds)?;
                agg.push(ratio_to_f64(accuracy(&scores, test.labels())?));
            }
        }
        for (j, &s) in sizes.iter().enumerate() {
            cells.push(cell(f + 1, EstimatorKind::Nystrom(s), std::mem::take(&mut per_size[j]), None));
        }
        if !agg.is_empty() {
            cells.push(cell(f + 1, EstimatorKind::Aggregated, agg, Some(proxy_ok)));
        }
    }
    Ok(CvTable {
        protocol: config.protocol,
        cells,
    })
}

impl CvTable {
    /// Estimators in table order: full, Nyström by size, aggregate.
    pub fn estimators(&self) -> Vec<EstimatorKind> {
        let mut e: Vec<EstimatorKind> = self.cells.iter().map(|c| c.estimator).collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn fold_count(&self) -> usize {
        self.cells.iter().map(|c| c.fold).max().unwrap_or(0)
    }

    /// Estimator × fold table of accuracy percentages, `mean (std)`.
    pub fn write_wide<W: Write>(&self, mut w: W) -> Result<()> {
        let folds = self.fold_count();
        write!(w, "protocol,estimator")?;
        for f in 1..=folds {
            write!(w, ",fold{f}")?;
        }
        writeln!(w)?;
        for e in self.estimators() {
            write!(w, "{},{e}", self.protocol)?;
            for f in 1..=folds {
                match self.cells.iter().find(|c| c.fold == f && c.estimator == e) {
                    Some(c) => write!(w, ",{:.2} ({:.2})", 100.0 * c.mean, 100.0 * c.std)?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// One row per draw: `protocol,fold,estimator,draw,accuracy`.
    pub fn write_long<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "protocol,fold,estimator,draw,accuracy")?;
        for c in &self.cells {
            for (d, a) in c.accuracies.iter().enumerate() {
                writeln!(w, "{},{},{},{},{:.16e}", self.protocol, c.fold, c.estimator, d + 1, a)?;
            }
        }
        Ok(())
    }
}

/// Settings of the empirical rate harness.
#[derive(Debug, Clone)]
pub struct RateSettings {
    /// Source-condition exponent used by the parameter rule.
    pub r: f64,
    /// Eigenvalue decay exponent for the rule, when known.
    pub b: Option<f64>,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Fresh points for the `ρ`-norm estimate.
    pub test_points: usize,
    /// Graph over the training inputs, weighted by the rule's `λ_j`.
    pub graph: Option<GraphSpec>,
    pub scaling: LaplacianScaling,
}

impl RateSettings {
    pub fn new(r: f64, sample_sizes: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            r,
            b: None,
            sample_sizes,
            trials,
            seed,
            test_points: 2000,
            graph: None,
            scaling: LaplacianScaling::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub sample_sizes: Vec<usize>,
    /// Mean `ρ`-norm error per sample size.
    pub errors: Vec<f64>,
    /// `trial_errors[t][i]`: error of trial `t` at size `i`.
    pub trial_errors: Vec<Vec<f64>>,
    pub trial_slopes: Vec<f64>,
    /// Mean of the per-trial log-log slopes.
    pub slope: f64,
    /// `−(2br+b)/(4br+2b+2)`, or `−(2r+1)/(4r+4)` without `b`.
    pub theoretical_exponent: f64,
}

/// Subsample schedule `s(m) = ⌈2√m·ln m⌉`, capped at `m`.
pub fn rate_subsample_size(m: usize) -> usize {
    let mf = m as f64;
    ((2.0 * mf.sqrt() * mf.ln()).ceil() as usize).clamp(1, m)
}

/// Fits the Nyström estimator with the a priori parameter rule at every
/// sample size and measures `‖f_z − f_H‖_ρ` by the root-mean-square error on
/// fresh uniform points.
pub fn rate_experiment(target: &SyntheticTarget, settings: &RateSettings) -> Result<RateReport> {
    let sizes = &settings.sample_sizes;
    if sizes.len() < 3 || sizes.iter().any(|&m| m < 50) {
        return Err(Error::InvalidParameter("need at least 3 sample sizes, each at least 50".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("sample sizes must be strictly increasing".into()));
    }
    if settings.trials == 0 || settings.test_points == 0 {
        return Err(Error::InvalidParameter("trials and test points must be positive".into()));
    }
    let d = target.dim();
    let mut trial_errors = Vec::with_capacity(settings.trials);
    let mut trial_slopes = Vec::with_capacity(settings.trials);
    for t in 0..settings.trials {
        let mut test_rng = ChaCha8Rng::seed_from_u64(mix_seed(settings.seed, &[t as u64, u64::MAX]));
        let test_x = Points::new((0..settings.test_points * d).map(|_| test_rng.random::<f64>()).collect(), d)?;
        let truth = DMatrix::from_column_slice(settings.test_points, 1, &target.eval(&test_x)?);
        let mut errs = Vec::with_capacity(sizes.len());
        for &m in sizes {
            let rule = parameter_rule(&RateRuleConfig {
                r: settings.r,
                b: settings.b,
                m,
            })?;
            let sample = gen_synthetic(target, m, m, mix_seed(settings.seed, &[t as u64, m as u64]))?;
            let data = &sample.dataset;
            let mut config = RegularizationConfig::new(rule.lambda0).with_scaling(settings.scaling);
            if let Some(g) = settings.graph {
                config = config.with_penalty(rule.lambda_j, Arc::new(g.build(data)?));
            }
            let landmarks = select_landmarks(
                m,
                LandmarkSelection::Uniform {
                    size: rate_subsample_size(m),
                    seed: mix_seed(settings.seed, &[t as u64, m as u64, 1]),
                },
            )?;
            let model = fit_nystrom(data, &landmarks, target.kernel(), &config)?;
            let err = mean_squared_error(&model.predict(&test_x)?, &truth)?.sqrt();
            if !(err > 0.0 && err.is_finite()) {
                return Err(Error::InvalidParameter(format!("degenerate fit at m = {m}: error {err}")));
            }
            errs.push(err);
        }
        let pts: Vec<(f64, f64)> = sizes.iter().zip(&errs).map(|(&m, &e)| ((m as f64).ln(), e.ln())).collect();
        trial_slopes.push(least_squares_slope(&pts));
        trial_errors.push(errs);
    }
    let errors = (0..sizes.len())
        .map(|i| trial_errors.iter().map(|e| e[i]).sum::<f64>() / settings.trials as f64)
        .collect();
    let r = settings.r;
    let theoretical_exponent = match settings.b {
        Some(b) => -(2.0 * b * r + b) / (4.0 * b * r + 2.0 * b + 2.0),
        None => -(2.0 * r + 1.0) / (4.0 * r + 4.0),
    };
    Ok(RateReport {
        sample_sizes: sizes.clone(),
        errors,
        slope: trial_slopes.iter().sum::<f64>() / trial_slopes.len() as f64,
        trial_errors,
        trial_slopes,
        theoretical_exponent,
    })
}

impl RateReport {
    /// `m,s,error` rows followed by the slope summary, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "m,s,error")?;
        for (&m, e) in self.sample_sizes.iter().zip(&self.errors) {
            writeln!(w, "{m},{},{:.16e}", rate_subsample_size(m), e)?;
        }
        writeln!(w, "# slope {:.16e}", self.slope)?;
        writeln!(w, "# theoretical {:.16e}", self.theoretical_exponent)?;
        Ok(())
    }
}
