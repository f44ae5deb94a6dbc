//! Closed-form multi-penalty least squares: the full representer solution,
//! the Nyström (landmark-restricted) solution, and prediction.
//!
//! Both fits minimize
//!
//! ```text
//! (1/m) Σ_{i≤m} ‖f(x_i) − y_i‖² + λ₀ ‖f‖²_H + Σ_j λ_j · w · fᵀ L_j f
//! ```
//!
//! where `f` stacks the predictor's values on all `n` points and the graph
//! weight `w` is `1` under [`LaplacianScaling::TimesM`] and `1/m` under
//! [`LaplacianScaling::None`]. The full fit searches all of `H`, the
//! Nyström fit only the span of the landmark kernel sections.

mod explicit;
pub mod model_io;

pub use explicit::{oracle_solve_explicit, ExplicitFeatureProblem};

use crate::data::{Dataset, Points};
use crate::error::{Error, Result};
use crate::graph::{GraphPenalty, GraphSpec};
use crate::kernels::{cross_gram, gram, gram_block, GramMatrix, KernelSpec};
use crate::linalg::{lu_solve, sym_pinv_solve, symmetrize_checked};
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Relative eigenvalue cutoff of the Nyström pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Relative asymmetry tolerated in the Nyström system before it is rejected.
pub const ASYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplacianScaling {
    /// Graph terms enter the normal equations as `λ_j·m·KᵀLK`.
    #[default]
    TimesM,
    /// Graph terms enter as `λ_j·KᵀLK`.
    None,
}

impl LaplacianScaling {
    /// Factor applied to `λ_j` in the `m`-scaled normal equations.
    pub fn system_factor(self, m: usize) -> f64 {
        match self {
            LaplacianScaling::TimesM => m as f64,
            LaplacianScaling::None => 1.0,
        }
    }
}

impl fmt::Display for LaplacianScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LaplacianScaling::TimesM => "times_m",
            LaplacianScaling::None => "none",
        })
    }
}

impl FromStr for LaplacianScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "times_m" => Ok(LaplacianScaling::TimesM),
            "none" => Ok(LaplacianScaling::None),
            _ => Err(Error::InvalidParameter(format!("unknown laplacian scaling {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegularizationConfig {
    pub lambda0: f64,
    pub graph_penalties: Vec<(f64, Arc<GraphPenalty>)>,
    pub laplacian_scaling: LaplacianScaling,
}

impl RegularizationConfig {
    pub fn new(lambda0: f64) -> Self {
        Self {
            lambda0,
            graph_penalties: Vec::new(),
            laplacian_scaling: LaplacianScaling::default(),
        }
    }

    pub fn with_penalty(mut self, lambda: f64, penalty: Arc<GraphPenalty>) -> Self {
        self.graph_penalties.push((lambda, penalty));
        self
    }

    pub fn with_scaling(mut self, scaling: LaplacianScaling) -> Self {
        self.laplacian_scaling = scaling;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda0 must be positive, got {}", self.lambda0)));
        }
        for (lambda, penalty) in &self.graph_penalties {
            if !(lambda.is_finite() && *lambda >= 0.0) {
                return Err(Error::InvalidParameter(format!("penalty weight must be nonnegative, got {lambda}")));
            }
            if penalty.size() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: penalty.size(),
                });
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> RegularizationSummary {
        RegularizationSummary {
            lambda0: self.lambda0,
            lambdas: self.graph_penalties.iter().map(|(l, _)| *l).collect(),
            scaling: self.laplacian_scaling,
        }
    }

    /// Graph terms with weights already multiplied by the scaling factor.
    fn scaled_terms(&self, m: usize) -> impl Iterator<Item = (f64, &DMatrix<f64>)> {
        let factor = self.laplacian_scaling.system_factor(m);
        self.graph_penalties
            .iter()
            .filter(|(l, _)| *l > 0.0)
            .map(move |(l, p)| (l * factor, p.matrix()))
    }
}

/// The numeric part of a [`RegularizationConfig`], kept with fitted models.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationSummary {
    pub lambda0: f64,
    pub lambdas: Vec<f64>,
    pub scaling: LaplacianScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandmarkSelection {
    /// `size` distinct indices drawn uniformly without replacement.
    Uniform { size: usize, seed: u64 },
    /// Indices `0..size`.
    FirstS(usize),
}

impl LandmarkSelection {
    pub fn size(&self) -> usize {
        match *self {
            LandmarkSelection::Uniform { size, .. } | LandmarkSelection::FirstS(size) => size,
        }
    }
}

/// Landmark indices in ascending order.
pub fn select_landmarks(n: usize, selection: LandmarkSelection) -> Result<Vec<usize>> {
    let s = selection.size();
    if s == 0 {
        return Err(Error::EmptyLandmarks);
    }
    if s > n {
        return Err(Error::InvalidParameter(format!("{s} landmarks requested from {n} points")));
    }
    let mut idx = match selection {
        LandmarkSelection::FirstS(_) => (0..s).collect(),
        LandmarkSelection::Uniform { seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample(&mut rng, n, s).into_vec()
        }
    };
    idx.sort_unstable();
    Ok(idx)
}

fn check_landmarks(landmarks: &[usize], n: usize) -> Result<()> {
    if landmarks.is_empty() {
        return Err(Error::EmptyLandmarks);
    }
    let mut seen = HashSet::with_capacity(landmarks.len());
    for &l in landmarks {
        if l >= n {
            return Err(Error::IndexOutOfRange { index: l, len: n });
        }
        if !seen.insert(l) {
            return Err(Error::InvalidParameter(format!("duplicate landmark {l}")));
        }
    }
    Ok(())
}

/// Predictor `f(x) = Σ_j K(x, x̃_j) c_j` over a landmark subset.
#[derive(Debug, Clone, PartialEq)]
pub struct NystromModel {
    pub landmark_indices: Vec<usize>,
    pub landmark_points: Points,
    pub coefficients: DMatrix<f64>,
    pub kernel: KernelSpec,
    pub regularization: RegularizationSummary,
}

impl NystromModel {
    pub fn landmark_count(&self) -> usize {
        self.landmark_indices.len()
    }

    pub fn outputs(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Predictions at `query`, one row per query point.
    pub fn predict(&self, query: &Points) -> Result<DMatrix<f64>> {
        let k = cross_gram(&self.kernel, query, &self.landmark_points)?;
        Ok(k * &self.coefficients)
    }

    /// Predictions from a precomputed `queries × landmarks` kernel block.
    pub fn predict_from_kernel(&self, k_qs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if k_qs.ncols() != self.landmark_count() {
            return Err(Error::DimensionMismatch {
                expected: self.landmark_count(),
                found: k_qs.ncols(),
            });
        }
        Ok(k_qs * &self.coefficients)
    }
}

pub fn predict(model: &NystromModel, query: &Points) -> Result<DMatrix<f64>> {
    model.predict(query)
}

/// Nyström multi-penalty fit restricted to the span of the landmark sections:
///
/// ```text
/// c = (K_msᵀK_ms + λ₀ m K_ss + Σ_j λ_j·σ·K_nsᵀ L_j K_ns)† K_msᵀ y
/// ```
///
/// with `σ = m` or `1` according to the configured Laplacian scaling.
pub fn fit_nystrom(data: &Dataset, landmarks: &[usize], kernel: &KernelSpec, config: &RegularizationConfig) -> Result<NystromModel> {
    let n = data.len();
    let m = data.labeled();
    if m == 0 {
        return Err(Error::NoLabels);
    }
    check_landmarks(landmarks, n)?;
    config.validate(n)?;
    let all: Vec<usize> = (0..n).collect();
    let k_ns = gram(kernel, data, &all, landmarks)?.values;
    let s = landmarks.len();
    let mut k_ss = DMatrix::zeros(s, s);
    for (r, &l) in landmarks.iter().enumerate() {
        k_ss.row_mut(r).copy_from(&k_ns.row(l));
    }
    if k_ss.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateKernel);
    }
    let k_ms = k_ns.rows(0, m);
    let mut system = k_ms.transpose() * k_ms;
    system += &k_ss * (config.lambda0 * m as f64);
    for (weight, l) in config.scaled_terms(m) {
        let lk = l * &k_ns;
        system += (k_ns.transpose() * lk) * weight;
    }
    let system = symmetrize_checked(&system, ASYMMETRY_TOL)?;
    let rhs = k_ms.transpose() * data.labels();
    let (coefficients, _rank) = sym_pinv_solve(&system, &rhs, PINV_CUTOFF)?;
    if coefficients.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    Ok(NystromModel {
        landmark_indices: landmarks.to_vec(),
        landmark_points: data.points().select(landmarks)?,
        coefficients,
        kernel: kernel.clone(),
        regularization: config.summary(),
    })
}

/// Full representer solution `c = (J K + λ_A m I + λ_I m L K)⁻¹ y_n`.
///
/// `y_n` has `n` rows and must vanish past row `m`. The system is
/// nonsymmetric and solved by LU; an ill-conditioned system is an error.
pub fn fit_full_manifold(
    k_n: &GramMatrix,
    y_n: &DMatrix<f64>,
    m: usize,
    lambda_a: f64,
    lambda_i: f64,
    laplacian: Option<&GraphPenalty>,
) -> Result<DMatrix<f64>> {
    if !(lambda_a.is_finite() && lambda_a > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda_A must be positive, got {lambda_a}")));
    }
    if !(lambda_i.is_finite() && lambda_i >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda_I must be nonnegative, got {lambda_i}")));
    }
    let terms: Vec<(f64, &DMatrix<f64>)> = match laplacian {
        Some(l) if lambda_i > 0.0 => vec![(lambda_i * m as f64, l.matrix())],
        _ => Vec::new(),
    };
    solve_full(&k_n.values, y_n, m, lambda_a, &terms)
}

fn solve_full(k: &DMatrix<f64>, y_n: &DMatrix<f64>, m: usize, lambda_a: f64, terms: &[(f64, &DMatrix<f64>)]) -> Result<DMatrix<f64>> {
    let n = k.nrows();
    if !k.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k.ncols(),
        });
    }
    if y_n.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y_n.nrows(),
        });
    }
    if m == 0 {
        return Err(Error::NoLabels);
    }
    if m > n {
        return Err(Error::InvalidParameter(format!("{m} labeled of {n} points")));
    }
    if y_n.rows(m, n - m).iter().any(|&v| v != 0.0) {
        return Err(Error::InvalidParameter("labels past row m must be zero".into()));
    }
    let mut system = DMatrix::zeros(n, n);
    system.rows_mut(0, m).copy_from(&k.rows(0, m));
    for i in 0..n {
        system[(i, i)] += lambda_a * m as f64;
    }
    for (weight, l) in terms {
        if l.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.nrows(),
            });
        }
        system += (*l * k) * *weight;
    }
    lu_solve(system, y_n)
}

/// Full-space predictor `f(x) = Σ_{i≤n} K(x, x_i) c_i`.
#[derive(Debug, Clone)]
pub struct FullModel {
    pub points: Points,
    pub coefficients: DMatrix<f64>,
    pub kernel: KernelSpec,
    pub regularization: RegularizationSummary,
}

impl FullModel {
    pub fn fit(data: &Dataset, kernel: &KernelSpec, config: &RegularizationConfig) -> Result<Self> {
        let n = data.len();
        config.validate(n)?;
        let m = data.labeled();
        if m == 0 {
            return Err(Error::NoLabels);
        }
        let all: Vec<usize> = (0..n).collect();
        let k = gram(kernel, data, &all, &all)?;
        let terms: Vec<(f64, &DMatrix<f64>)> = config.scaled_terms(m).collect();
        let coefficients = solve_full(&k.values, &data.padded_labels(), m, config.lambda0, &terms)?;
        Ok(Self {
            points: data.points().clone(),
            coefficients,
            kernel: kernel.clone(),
            regularization: config.summary(),
        })
    }

    pub fn predict(&self, query: &Points) -> Result<DMatrix<f64>> {
        Ok(cross_gram(&self.kernel, query, &self.points)? * &self.coefficients)
    }
}

/// Two-penalty recipe: `λ₀` on the RKHS norm and `λ₁` on the graph built by
/// `graph` over the training points.
#[derive(Debug, Clone)]
pub struct FitSpec {
    pub kernel: KernelSpec,
    pub lambda0: f64,
    pub lambda1: f64,
    pub graph: Option<GraphSpec>,
    pub scaling: LaplacianScaling,
}

impl FitSpec {
    pub fn new(kernel: KernelSpec, lambda0: f64) -> Self {
        Self {
            kernel,
            lambda0,
            lambda1: 0.0,
            graph: None,
            scaling: LaplacianScaling::default(),
        }
    }

    pub fn with_graph(mut self, lambda1: f64, graph: GraphSpec) -> Self {
        self.lambda1 = lambda1;
        self.graph = Some(graph);
        self
    }

    /// The graph over `data`, when one is configured.
    pub fn penalty(&self, data: &Dataset) -> Result<Option<Arc<GraphPenalty>>> {
        self.graph.map(|g| g.build(data).map(Arc::new)).transpose()
    }

    /// Configuration reusing an already built graph.
    pub fn config_with(&self, penalty: Option<&Arc<GraphPenalty>>) -> RegularizationConfig {
        let config = RegularizationConfig::new(self.lambda0).with_scaling(self.scaling);
        match penalty {
            Some(p) => config.with_penalty(self.lambda1, Arc::clone(p)),
            None => config,
        }
    }

    pub fn config(&self, data: &Dataset) -> Result<RegularizationConfig> {
        Ok(self.config_with(self.penalty(data)?.as_ref()))
    }
}

/// Value of the regularized objective for a landmark expansion with
/// coefficients `c` (`s × P`).
pub fn nystrom_objective(
    data: &Dataset,
    kernel: &KernelSpec,
    landmarks: &[usize],
    c: &DMatrix<f64>,
    config: &RegularizationConfig,
) -> Result<f64> {
    let n = data.len();
    check_landmarks(landmarks, n)?;
    let all: Vec<usize> = (0..n).collect();
    let points = data.points();
    let k_ns = gram_block(kernel, points, &all, points, landmarks);
    let k_ss = gram_block(kernel, points, landmarks, points, landmarks);
    let f = &k_ns * c;
    Ok(objective_from_values(&f, &(c.transpose() * k_ss * c), data, config))
}

/// Value of the regularized objective for a full expansion over all points.
pub fn full_objective(data: &Dataset, kernel: &KernelSpec, c: &DMatrix<f64>, config: &RegularizationConfig) -> Result<f64> {
    let all: Vec<usize> = (0..data.len()).collect();
    let k = gram(kernel, data, &all, &all)?.values;
    let f = &k * c;
    Ok(objective_from_values(&f, &(c.transpose() * k * c), data, config))
}

fn objective_from_values(f: &DMatrix<f64>, norm_gram: &DMatrix<f64>, data: &Dataset, config: &RegularizationConfig) -> f64 {
    let m = data.labeled();
    let residual = f.rows(0, m) - data.labels();
    let mut value = residual.norm_squared() / m as f64 + config.lambda0 * norm_gram.trace();
    let w = config.laplacian_scaling.system_factor(m) / m as f64;
    for (lambda, penalty) in &config.graph_penalties {
        value += lambda * w * (f.transpose() * penalty.matrix() * f).trace();
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{exp_weights, laplacian};
    use rand::{Rng, SeedableRng};

    fn random_data(n: usize, m: usize, d: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Points::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap();
        let y = DMatrix::from_fn(m, p, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        Dataset::new(x, y).unwrap()
    }

    fn graph_config(data: &Dataset, lambda0: f64, lambda1: f64) -> RegularizationConfig {
        let all: Vec<usize> = (0..data.len()).collect();
        let l = laplacian(&exp_weights(data, 0.2, &all).unwrap()).unwrap();
        RegularizationConfig::new(lambda0).with_penalty(lambda1, Arc::new(l))
    }

    #[test]
    fn zero_labels_zero_model() {
        let mut d = random_data(8, 5, 2, 2, 1);
        d = Dataset::new(d.points().clone(), DMatrix::zeros(5, 2)).unwrap();
        let cfg = graph_config(&d, 1e-2, 0.5);
        let k = KernelSpec::gaussian(2.0).unwrap();
        let model = fit_nystrom(&d, &[0, 3, 6], &k, &cfg).unwrap();
        assert!(model.coefficients.iter().all(|&v| v == 0.0));
        let all: Vec<usize> = (0..8).collect();
        let g = gram(&k, &d, &all, &all).unwrap();
        let c = fit_full_manifold(&g, &d.padded_labels(), 5, 1e-2, 0.5, Some(&cfg.graph_penalties[0].1)).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_without_graph_is_kernel_ridge() {
        let d = random_data(7, 7, 3, 1, 2);
        let k = KernelSpec::gaussian(1.0).unwrap();
        let all: Vec<usize> = (0..7).collect();
        let g = gram(&k, &d, &all, &all).unwrap();
        let lambda = 0.05;
        let c = fit_full_manifold(&g, d.labels(), 7, lambda, 0.0, None).unwrap();
        let mut reg = g.values.clone();
        for i in 0..7 {
            reg[(i, i)] += lambda * 7.0;
        }
        let ridge = reg.cholesky().unwrap().solve(d.labels());
        assert!((c - ridge).amax() <= 1e-10);
    }

    #[test]
    fn full_rejects_nonzero_padding() {
        let d = random_data(4, 4, 1, 1, 3);
        let all: Vec<usize> = (0..4).collect();
        let g = gram(&KernelSpec::Linear, &d, &all, &all).unwrap();
        assert!(fit_full_manifold(&g, d.labels(), 2, 1.0, 0.0, None).is_err());
        assert!(fit_full_manifold(&g, d.labels(), 4, 0.0, 0.0, None).is_err());
    }

    #[test]
    fn nystrom_errors() {
        let d = random_data(6, 3, 2, 1, 4);
        let k = KernelSpec::gaussian(1.0).unwrap();
        let cfg = RegularizationConfig::new(0.1);
        assert!(matches!(fit_nystrom(&d, &[], &k, &cfg), Err(Error::EmptyLandmarks)));
        assert!(fit_nystrom(&d, &[1, 1], &k, &cfg).is_err());
        assert!(fit_nystrom(&d, &[6], &k, &cfg).is_err());
        assert!(fit_nystrom(&d, &[0], &k, &RegularizationConfig::new(0.0)).is_err());
        let zeros = Dataset::new(Points::new(vec![0.0; 6], 1).unwrap(), DMatrix::from_element(2, 1, 1.0)).unwrap();
        assert!(matches!(
            fit_nystrom(&zeros, &[0, 1], &KernelSpec::Linear, &cfg),
            Err(Error::DegenerateKernel)
        ));
    }

    #[test]
    fn single_landmark_prediction_at_landmark() {
        let d = random_data(4, 4, 2, 1, 5);
        let model = NystromModel {
            landmark_indices: vec![2],
            landmark_points: d.points().select(&[2]).unwrap(),
            coefficients: DMatrix::from_element(1, 1, 1.0),
            kernel: KernelSpec::gaussian(3.0).unwrap(),
            regularization: RegularizationConfig::new(1.0).summary(),
        };
        let q = d.points().select(&[2]).unwrap();
        assert_eq!(model.predict(&q).unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn predict_matches_expansion_loop() {
        let d = random_data(10, 6, 3, 2, 6);
        let k = KernelSpec::gaussian(0.8).unwrap();
        let cfg = graph_config(&d, 1e-3, 1e-2);
        let model = fit_nystrom(&d, &[1, 4, 7, 9], &k, &cfg).unwrap();
        let q = random_data(5, 0, 3, 1, 7);
        let pred = model.predict(q.points()).unwrap();
        for r in 0..5 {
            for p in 0..2 {
                let mut want = 0.0;
                for (j, &l) in model.landmark_indices.iter().enumerate() {
                    want += k.eval(q.points().row(r), d.points().row(l)).unwrap() * model.coefficients[(j, p)];
                }
                assert!((pred[(r, p)] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn landmark_selection_is_seeded() {
        let a = select_landmarks(100, LandmarkSelection::Uniform { size: 10, seed: 3 }).unwrap();
        let b = select_landmarks(100, LandmarkSelection::Uniform { size: 10, seed: 3 }).unwrap();
        assert_eq!(a, b);
        let set: HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), 10);
        assert_eq!(select_landmarks(5, LandmarkSelection::FirstS(3)).unwrap(), vec![0, 1, 2]);
        assert!(select_landmarks(5, LandmarkSelection::FirstS(6)).is_err());
        assert!(select_landmarks(5, LandmarkSelection::FirstS(0)).is_err());
    }

    #[test]
    fn rkhs_norm_nonincreasing_in_lambda() {
        let d = random_data(9, 9, 2, 1, 8);
        let k = KernelSpec::gaussian(1.5).unwrap();
        let landmarks = [0, 2, 4, 6, 8];
        let points = d.points();
        let k_ss = gram_block(&k, points, &landmarks, points, &landmarks);
        let mut prev = f64::INFINITY;
        for e in -6..=2 {
            let lambda = 10f64.powi(e);
            let model = fit_nystrom(&d, &landmarks, &k, &RegularizationConfig::new(lambda)).unwrap();
            let c = &model.coefficients;
            let norm = (c.transpose() * &k_ss * c)[(0, 0)];
            assert!(norm <= prev + 1e-10, "norm {norm} > {prev} at lambda {lambda}");
            prev = norm;
        }
    }

    #[test]
    fn perturbations_never_decrease_objective() {
        let d = random_data(10, 6, 2, 2, 9);
        let k = KernelSpec::gaussian(1.0).unwrap();
        let cfg = graph_config(&d, 1e-2, 1e-1);
        let landmarks = [0, 3, 5, 8];
        let model = fit_nystrom(&d, &landmarks, &k, &cfg).unwrap();
        let base = nystrom_objective(&d, &k, &landmarks, &model.coefficients, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let mut dir = DMatrix::from_fn(4, 2, |_, _| rng.random::<f64>() - 0.5);
            dir /= dir.norm();
            let perturbed = &model.coefficients + dir * 1e-3;
            let v = nystrom_objective(&d, &k, &landmarks, &perturbed, &cfg).unwrap();
            assert!(v >= base - 1e-12 * base.abs());
        }
    }

    #[test]
    fn scaling_none_divides_graph_weight_by_m() {
        let d = random_data(8, 4, 2, 1, 11);
        let k = KernelSpec::gaussian(1.0).unwrap();
        let lm = [0, 2, 5];
        let times_m = fit_nystrom(&d, &lm, &k, &graph_config(&d, 1e-2, 0.3)).unwrap();
        let none = fit_nystrom(&d, &lm, &k, &graph_config(&d, 1e-2, 0.3 * 4.0).with_scaling(LaplacianScaling::None)).unwrap();
        assert!((times_m.coefficients - none.coefficients).amax() < 1e-9);
    }
}
