//! Multi-view manifold regularization with a combination operator
//! `C f(x) = Σ_i c_i f^i(x)`, `‖c‖ = α`.
//!
//! Coefficients use the interleaved layout of the multi-view Gram matrix:
//! row `p·v + i` of `A` holds the `P` coefficients of view `i` at point `p`.
//! For a fixed `c`, the full solution solves `(B + mλ_A I) A = Y_C` with
//!
//! ```text
//! B   = (J ⊗ ccᵀ + mλ_B I ⊗ M_v + mλ_W L) G
//! Y_C = [c y_1ᵀ; …; c y_mᵀ; 0; …; 0]
//! ```
//!
//! and the Nyström solution over landmarks `x^s` solves the normal equations
//! of the same objective restricted to the landmark span,
//! `(G_nsᵀ B_ns + mλ_A G_ss) A = G_nsᵀ Y_C`, by a symmetric pseudoinverse.
//! Neither `G` nor the Kronecker factors are formed: every product is taken
//! view by view.

use crate::aggregation::{lfs_from_predictions, LfsWeights};
use crate::data::{Dataset, Points};
use crate::error::{Error, Result};
use crate::graph::{GraphPenalty, GraphSpec};
use crate::kernels::MultiViewKernel;
use crate::linalg::{lu_solve, sym_pinv_solve, symmetrize_checked};
use crate::solver::{ASYMMETRY_TOL, PINV_CUTOFF};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Outer iterations of the weight search.
pub const WEIGHT_ITERATIONS: usize = 25;
/// Random restarts in addition to the uniform start.
pub const WEIGHT_RESTARTS: usize = 4;
const NORM_TOL: f64 = 1e-10;

/// Weight vector on the sphere `‖c‖ = α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationWeights {
    c: DVector<f64>,
    alpha: f64,
}

impl CombinationWeights {
    /// Rescales `c` onto the sphere of radius `alpha`.
    pub fn new(c: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("sphere radius must be positive, got {alpha}")));
        }
        let c = DVector::from_vec(c);
        let norm = c.norm();
        if c.is_empty() || !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter("combination weights must be a nonzero finite vector".into()));
        }
        Ok(Self { c: c * (alpha / norm), alpha })
    }

    /// `α/√v · (1, …, 1)`.
    pub fn uniform(v: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![1.0; v], alpha)
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiViewConfig {
    pub lambda_a: f64,
    /// Between-view consistency weight.
    pub lambda_b: f64,
    /// Within-view smoothness weight.
    pub lambda_w: f64,
}

impl MultiViewConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda_a.is_finite() && self.lambda_a > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda_A must be positive, got {}", self.lambda_a)));
        }
        for (name, v) in [("lambda_B", self.lambda_b), ("lambda_W", self.lambda_w)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// One Laplacian per view, each built from that view's input columns.
pub fn per_view_laplacians(data: &Dataset, kernel: &MultiViewKernel, graph: GraphSpec) -> Result<Vec<GraphPenalty>> {
    kernel
        .slices()
        .iter()
        .map(|slice| {
            let values: Vec<f64> = data.points().rows().flat_map(|r| r[slice.clone()].iter().copied()).collect();
            let view = Dataset::new(Points::new(values, slice.len())?, DMatrix::zeros(0, 1))?;
            graph.build(&view)
        })
        .collect()
}

fn check_views(blocks: &[DMatrix<f64>], c: &CombinationWeights, graph: Option<&[GraphPenalty]>) -> Result<(usize, usize)> {
    let v = blocks.len();
    let (n, s) = blocks.first().map(|b| b.shape()).ok_or(Error::EmptyInput("views"))?;
    if c.len() != v {
        return Err(Error::DimensionMismatch {
            expected: v,
            found: c.len(),
        });
    }
    if let Some(b) = blocks.iter().find(|b| b.shape() != (n, s)) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.nrows(),
        });
    }
    if let Some(g) = graph {
        if g.len() != v {
            return Err(Error::DimensionMismatch {
                expected: v,
                found: g.len(),
            });
        }
        if let Some(l) = g.iter().find(|l| l.size() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.size(),
            });
        }
    }
    Ok((n, s))
}

/// `B = (J ⊗ ccᵀ + mλ_B I ⊗ M_v + mλ_W L) G[x′, x^s]` from the per-view
/// `n × s` kernel blocks `K^i(x_p, x_j)` and per-view Laplacians `L^i`.
/// Returns the `nv × sv` matrix in interleaved layout.
pub fn assemble_b(
    blocks: &[DMatrix<f64>],
    c: &CombinationWeights,
    lambda_b: f64,
    lambda_w: f64,
    graph: Option<&[GraphPenalty]>,
    m: usize,
) -> Result<DMatrix<f64>> {
    let (n, s) = check_views(blocks, c, graph)?;
    if m > n {
        return Err(Error::InvalidParameter(format!("{m} labeled of {n} points")));
    }
    let v = blocks.len();
    let cw = c.as_vector();
    let mb = m as f64 * lambda_b;
    let mw = m as f64 * lambda_w;
    let lk: Option<Vec<DMatrix<f64>>> = match graph {
        Some(g) if mw != 0.0 => Some(g.iter().zip(blocks).map(|(l, k)| l.matrix() * k).collect()),
        None if mw != 0.0 => return Err(Error::InvalidParameter("lambda_W > 0 needs per-view Laplacians".into())),
        _ => None,
    };
    let mut out = DMatrix::zeros(n * v, s * v);
    for j in 0..s {
        for ip in 0..v {
            let col = j * v + ip;
            let k = &blocks[ip];
            for p in 0..n {
                let kv = k[(p, j)];
                for i in 0..v {
                    let mut val = if p < m { cw[i] * cw[ip] * kv } else { 0.0 };
                    val += mb * if i == ip { (v as f64 - 1.0) * kv } else { -kv };
                    if i == ip {
                        if let Some(lk) = &lk {
                            val += mw * lk[ip][(p, j)];
                        }
                    }
                    out[(p * v + i, col)] = val;
                }
            }
        }
    }
    Ok(out)
}

/// `Y_C`: block `p` is `c y_pᵀ` for labeled points and zero otherwise.
pub fn combined_targets(labels: &DMatrix<f64>, c: &CombinationWeights, n: usize) -> DMatrix<f64> {
    let v = c.len();
    let cw = c.as_vector();
    let mut out = DMatrix::zeros(n * v, labels.ncols());
    for p in 0..labels.nrows() {
        for i in 0..v {
            out.row_mut(p * v + i).copy_from(&(labels.row(p) * cw[i]));
        }
    }
    out
}

/// Rows of the interleaved `A` that belong to view `i`.
fn view_rows(a: &DMatrix<f64>, v: usize, i: usize) -> DMatrix<f64> {
    let rows: Vec<usize> = (i..a.nrows()).step_by(v).collect();
    a.select_rows(&rows)
}

/// `G_nsᵀ X` for an `nv × k` matrix `X`, from per-view `n × s` blocks.
fn gram_transpose_times(blocks: &[DMatrix<f64>], x: &DMatrix<f64>) -> DMatrix<f64> {
    let v = blocks.len();
    let s = blocks[0].ncols();
    let mut out = DMatrix::zeros(s * v, x.ncols());
    for (i, k) in blocks.iter().enumerate() {
        let part = k.transpose() * view_rows(x, v, i);
        for j in 0..s {
            out.row_mut(j * v + i).copy_from(&part.row(j));
        }
    }
    out
}

/// `G X` for an `sv × k` interleaved `X`, from per-view `q × s` blocks;
/// returns the `qv × k` interleaved product.
fn gram_times(blocks: &[DMatrix<f64>], x: &DMatrix<f64>) -> DMatrix<f64> {
    let v = blocks.len();
    let q = blocks[0].nrows();
    let mut out = DMatrix::zeros(q * v, x.ncols());
    for (i, k) in blocks.iter().enumerate() {
        let part = k * view_rows(x, v, i);
        for p in 0..q {
            out.row_mut(p * v + i).copy_from(&part.row(p));
        }
    }
    out
}

/// Per-view predictions `f^i` (each `q × P`) from per-view `q × s` kernel
/// blocks and interleaved coefficients.
fn view_predictions(blocks: &[DMatrix<f64>], a: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let v = blocks.len();
    blocks.iter().enumerate().map(|(i, k)| k * view_rows(a, v, i)).collect()
}

fn combine_views(views: &[DMatrix<f64>], c: &DVector<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(views[0].nrows(), views[0].ncols());
    for (f, &ci) in views.iter().zip(c.iter()) {
        out += f * ci;
    }
    out
}

/// One kernel level of the estimator; `landmarks = None` uses every point.
#[derive(Debug, Clone)]
pub struct LevelSpec {
    pub kernel: MultiViewKernel,
    pub landmarks: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewLevel {
    pub kernel: MultiViewKernel,
    pub landmark_indices: Vec<usize>,
    pub landmark_points: Points,
    /// `sv × P` interleaved coefficients.
    pub coefficients: DMatrix<f64>,
    /// `‖system·A − rhs‖ / ‖rhs‖` of the solved equations.
    pub relative_residual: f64,
}

impl MultiViewLevel {
    /// Per-view predictions at `query`.
    pub fn view_predictions(&self, query: &Points) -> Result<Vec<DMatrix<f64>>> {
        let rows: Vec<usize> = (0..query.len()).collect();
        let cols: Vec<usize> = (0..self.landmark_points.len()).collect();
        let blocks = self.kernel.per_view_blocks(query, &rows, &self.landmark_points, &cols)?;
        Ok(view_predictions(&blocks, &self.coefficients))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewModel {
    pub levels: Vec<MultiViewLevel>,
    pub weights: CombinationWeights,
    pub config: MultiViewConfig,
    pub classes: usize,
    /// LFS weights across levels; `None` for a single level.
    pub lfs: Option<LfsWeights>,
}

impl MultiViewModel {
    fn level_weights(&self) -> DVector<f64> {
        match &self.lfs {
            Some(l) => l.cbar.clone(),
            None => DVector::from_element(self.levels.len(), 1.0),
        }
    }

    /// Per-view predictions with levels already combined by the LFS weights.
    pub fn view_predictions(&self, query: &Points) -> Result<Vec<DMatrix<f64>>> {
        let w = self.level_weights();
        let mut acc: Option<Vec<DMatrix<f64>>> = None;
        for (level, &wr) in self.levels.iter().zip(w.iter()) {
            let views = level.view_predictions(query)?;
            acc = Some(match acc {
                None => views.into_iter().map(|f| f * wr).collect(),
                Some(mut a) => {
                    for (t, f) in a.iter_mut().zip(views) {
                        *t += f * wr;
                    }
                    a
                }
            });
        }
        acc.ok_or(Error::EmptyInput("levels"))
    }

    /// Combined scores `C f(x)`, one row per query point.
    pub fn scores(&self, query: &Points) -> Result<DMatrix<f64>> {
        Ok(combine_views(&self.view_predictions(query)?, self.weights.as_vector()))
    }

    /// Zero-based class index per query point.
    pub fn classify(&self, query: &Points) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.scores(query)?))
    }
}

/// Zero-based index of the largest entry in each row; ties go to the lowest
/// index.
pub fn argmax_rows(scores: &DMatrix<f64>) -> Vec<usize> {
    (0..scores.nrows())
        .map(|r| {
            let mut best = 0;
            for j in 1..scores.ncols() {
                if scores[(r, j)] > scores[(r, best)] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

pub fn classify_multiview(model: &MultiViewModel, query: &Points) -> Result<Vec<usize>> {
    model.classify(query)
}

fn solve_level(
    data: &Dataset,
    spec: &LevelSpec,
    weights: &CombinationWeights,
    config: &MultiViewConfig,
    graph: Option<&[GraphPenalty]>,
) -> Result<MultiViewLevel> {
    let n = data.len();
    let m = data.labeled();
    let points = data.points();
    let all: Vec<usize> = (0..n).collect();
    let landmarks = spec.landmarks.clone().unwrap_or_else(|| all.clone());
    if landmarks.is_empty() {
        return Err(Error::EmptyLandmarks);
    }
    let blocks = spec.kernel.per_view_blocks(points, &all, points, &landmarks)?;
    let b = assemble_b(&blocks, weights, config.lambda_b, config.lambda_w, graph, m)?;
    let y_c = combined_targets(data.labels(), weights, n);
    let ml = m as f64 * config.lambda_a;
    let (system, rhs) = if spec.landmarks.is_none() {
        let mut system = b;
        for d in 0..system.nrows() {
            system[(d, d)] += ml;
        }
        (system, y_c)
    } else {
        let mut system = gram_transpose_times(&blocks, &b);
        let v = blocks.len();
        for (i, k) in blocks.iter().enumerate() {
            for (jr, &lr) in landmarks.iter().enumerate() {
                for (jc, _) in landmarks.iter().enumerate() {
                    system[(jr * v + i, jc * v + i)] += ml * k[(lr, jc)];
                }
            }
        }
        (system, gram_transpose_times(&blocks, &y_c))
    };
    let coefficients = if spec.landmarks.is_none() {
        lu_solve(system.clone(), &rhs)?
    } else {
        let sym = symmetrize_checked(&system, ASYMMETRY_TOL)?;
        sym_pinv_solve(&sym, &rhs, PINV_CUTOFF)?.0
    };
    if coefficients.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("multi-view coefficients"));
    }
    let rhs_norm = rhs.norm();
    let residual = (&system * &coefficients - &rhs).norm();
    Ok(MultiViewLevel {
        kernel: spec.kernel.clone(),
        landmark_points: points.select(&landmarks)?,
        landmark_indices: landmarks,
        coefficients,
        relative_residual: if rhs_norm > 0.0 { residual / rhs_norm } else { residual },
    })
}

/// Fits every level for fixed weights; with several levels the level
/// predictors are combined by LFS on the training points.
pub fn fit_multiview(
    data: &Dataset,
    levels: &[LevelSpec],
    weights: &CombinationWeights,
    config: &MultiViewConfig,
    graph: Option<&[GraphPenalty]>,
) -> Result<MultiViewModel> {
    config.validate()?;
    if levels.is_empty() {
        return Err(Error::EmptyInput("levels"));
    }
    if data.labeled() == 0 {
        return Err(Error::NoLabels);
    }
    if let Some(bad) = levels.iter().find(|l| l.kernel.view_count() != weights.len()) {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            found: bad.kernel.view_count(),
        });
    }
    let fitted: Vec<MultiViewLevel> = levels
        .iter()
        .map(|spec| solve_level(data, spec, weights, config, graph))
        .collect::<Result<_>>()?;
    let lfs = if fitted.len() > 1 {
        let preds: Vec<DMatrix<f64>> = fitted
            .iter()
            .map(|l| Ok(combine_views(&l.view_predictions(data.points())?, weights.as_vector())))
            .collect::<Result<_>>()?;
        Some(lfs_from_predictions(&preds, data.labels())?)
    } else {
        None
    };
    Ok(MultiViewModel {
        levels: fitted,
        weights: weights.clone(),
        config: *config,
        classes: data.outputs(),
        lfs,
    })
}

/// Objective value of interleaved landmark coefficients `a` (`sv × P`):
///
/// ```text
/// (1/m) Σ_{p<m} ‖y_p − Σ_i c_i (G a)_{p,i}‖² + λ_A aᵀG_ss a
///   + λ_B (Ga)ᵀ(I ⊗ M_v)(Ga) + λ_W Σ_i (Ga)_iᵀ L^i (Ga)_i
/// ```
pub fn multiview_objective(
    data: &Dataset,
    kernel: &MultiViewKernel,
    landmarks: &[usize],
    weights: &CombinationWeights,
    config: &MultiViewConfig,
    graph: Option<&[GraphPenalty]>,
    a: &DMatrix<f64>,
) -> Result<f64> {
    let n = data.len();
    let m = data.labeled();
    let points = data.points();
    let all: Vec<usize> = (0..n).collect();
    let blocks = kernel.per_view_blocks(points, &all, points, landmarks)?;
    check_views(&blocks, weights, graph)?;
    let v = blocks.len();
    let views = view_predictions(&blocks, a);
    let cf = combine_views(&views, weights.as_vector());
    let fit = (cf.rows(0, m) - data.labels()).norm_squared() / m as f64;
    let ga_ss: f64 = {
        let ss: Vec<DMatrix<f64>> = blocks.iter().map(|k| k.select_rows(landmarks)).collect();
        let g_a = gram_times(&ss, a);
        a.dot(&g_a)
    };
    let mut between = 0.0;
    for p in 0..n {
        for q in 0..a.ncols() {
            let vals: Vec<f64> = views.iter().map(|f| f[(p, q)]).collect();
            let sum: f64 = vals.iter().sum();
            between += vals.iter().map(|x| v as f64 * x * x).sum::<f64>() - sum * sum;
        }
    }
    let mut within = 0.0;
    if let Some(g) = graph {
        for (l, f) in g.iter().zip(&views) {
            within += f.dot(&(l.matrix() * f));
        }
    }
    Ok(fit + config.lambda_a * ga_ss + config.lambda_b * between + config.lambda_w * within)
}

/// Validation loss `(1/m) Σ ‖y − Σ_i c_i F_i‖²` as the quadratic
/// `cᵀQc − 2cᵀq + r`.
struct WeightLoss {
    q_mat: DMatrix<f64>,
    q_vec: DVector<f64>,
    constant: f64,
}

impl WeightLoss {
    fn new(views: &[DMatrix<f64>], labels: &DMatrix<f64>) -> Self {
        let v = views.len();
        let m = labels.nrows() as f64;
        let q_mat = DMatrix::from_fn(v, v, |i, j| views[i].dot(&views[j]) / m);
        let q_vec = DVector::from_fn(v, |i, _| views[i].dot(labels) / m);
        Self {
            q_mat,
            q_vec,
            constant: labels.norm_squared() / m,
        }
    }

    fn eval(&self, c: &DVector<f64>) -> f64 {
        c.dot(&(&self.q_mat * c)) - 2.0 * c.dot(&self.q_vec) + self.constant
    }
}

/// Validation loss of the combined predictor for weights `c`.
pub fn weight_loss(model: &MultiViewModel, validation: &Dataset, c: &CombinationWeights) -> Result<f64> {
    let (views, labels) = validation_views(model, validation)?;
    Ok(WeightLoss::new(&views, &labels).eval(c.as_vector()))
}

fn validation_views(model: &MultiViewModel, validation: &Dataset) -> Result<(Vec<DMatrix<f64>>, DMatrix<f64>)> {
    let m = validation.labeled();
    if m == 0 {
        return Err(Error::EmptyInput("validation set"));
    }
    if validation.outputs() != model.classes {
        return Err(Error::DimensionMismatch {
            expected: model.classes,
            found: validation.outputs(),
        });
    }
    let labeled: Vec<usize> = (0..m).collect();
    let views = model.view_predictions(&validation.points().select(&labeled)?)?;
    Ok((views, validation.labels().clone()))
}

/// Point on the great circle through unit `u` towards direction `d ⊥ u`.
fn rotate(u: &DVector<f64>, d: &DVector<f64>, theta: f64) -> DVector<f64> {
    u * theta.cos() + d * theta.sin()
}

/// Best angle on the circle through `u` and `d` by a dense grid followed by
/// golden-section refinement around the best grid point.
fn best_angle(loss: &WeightLoss, alpha: f64, u: &DVector<f64>, d: &DVector<f64>) -> (f64, f64) {
    const GRID: usize = 72;
    let f = |t: f64| loss.eval(&(rotate(u, d, t) * alpha));
    let step = 2.0 * std::f64::consts::PI / GRID as f64;
    let mut best = (0.0, f(0.0));
    for k in 1..GRID {
        let t = k as f64 * step - std::f64::consts::PI;
        let val = f(t);
        if val < best.1 {
            best = (t, val);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    let val = f(t);
    if val < best.1 {
        (t, val)
    } else {
        best
    }
}

/// Coordinate search on the sphere: each sweep rotates the current unit
/// vector along the great circle towards every axis `e_i`, keeping a move
/// only if it lowers the loss.
fn sphere_search(loss: &WeightLoss, alpha: f64, start: DVector<f64>) -> (DVector<f64>, f64) {
    let v = start.len();
    let mut u = start.normalize();
    let mut current = loss.eval(&(&u * alpha));
    for _ in 0..WEIGHT_ITERATIONS {
        let before = current;
        for i in 0..v {
            let mut d = -&u * u[i];
            d[i] += 1.0;
            let norm = d.norm();
            if norm < 1e-12 {
                continue;
            }
            d /= norm;
            let (t, val) = best_angle(loss, alpha, &u, &d);
            if val < current {
                u = rotate(&u, &d, t).normalize();
                current = loss.eval(&(&u * alpha));
            }
        }
        if before - current <= 1e-15 * before.abs().max(1.0) {
            break;
        }
    }
    (u * alpha, current)
}

/// Weights on the sphere `‖c‖ = α` minimizing the validation loss of the
/// fixed predictor, from the uniform start and seeded random restarts.
/// The result never has a higher loss than the uniform vector.
pub fn optimize_combination(model: &MultiViewModel, validation: &Dataset, seed: u64) -> Result<CombinationWeights> {
    let alpha = model.weights.alpha();
    let v = model.weights.len();
    let (views, labels) = validation_views(model, validation)?;
    if v == 1 {
        return CombinationWeights::new(vec![alpha], alpha);
    }
    let loss = WeightLoss::new(&views, &labels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![DVector::from_element(v, 1.0)];
    for _ in 0..WEIGHT_RESTARTS {
        let mut d = DVector::from_fn(v, |_, _| StandardNormal.sample(&mut rng));
        if d.norm() < 1e-12 {
            d[0] = 1.0;
        }
        starts.push(d);
    }
    let mut best: Option<(DVector<f64>, f64)> = None;
    for s in starts {
        let (c, val) = sphere_search(&loss, alpha, s);
        if best.as_ref().is_none_or(|b| val < b.1) {
            best = Some((c, val));
        }
    }
    let (c, _) = best.expect("at least one start");
    let out = CombinationWeights::new(c.as_slice().to_vec(), alpha)?;
    debug_assert!((out.as_vector().norm() - alpha).abs() <= NORM_TOL * alpha.max(1.0));
    Ok(out)
}

/// Alternates between fitting the predictor for fixed weights and
/// optimizing the weights on `validation`, for `rounds` rounds starting from
/// the uniform vector. Returns the model with the lowest validation loss.
#[allow(clippy::too_many_arguments)]
pub fn fit_multiview_alternating(
    data: &Dataset,
    validation: &Dataset,
    levels: &[LevelSpec],
    config: &MultiViewConfig,
    graph: Option<&[GraphPenalty]>,
    alpha: f64,
    rounds: usize,
    seed: u64,
) -> Result<MultiViewModel> {
    let v = levels.first().ok_or(Error::EmptyInput("levels"))?.kernel.view_count();
    let mut weights = CombinationWeights::uniform(v, alpha)?;
    let mut best: Option<(MultiViewModel, f64)> = None;
    for round in 0..rounds.max(1) {
        let model = fit_multiview(data, levels, &weights, config, graph)?;
        let loss = weight_loss(&model, validation, &weights)?;
        let next = optimize_combination(&model, validation, seed.wrapping_add(round as u64))?;
        if best.as_ref().is_none_or(|b| loss < b.1) {
            best = Some((model, loss));
        }
        if next == weights {
            break;
        }
        weights = next;
    }
    Ok(best.expect("at least one round").0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{between_view_operator, multiview_block_laplacian};
    use crate::kernels::{multiview_gram, KernelSpec};
    use crate::solver::{fit_full_manifold, LandmarkSelection};
    use rand::Rng;

    fn two_view_data(n: usize, m: usize, p: usize, seed: u64) -> (Dataset, MultiViewKernel) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Points::new((0..n * 3).map(|_| rng.random::<f64>()).collect(), 3).unwrap();
        let y = DMatrix::from_fn(m, p, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let kernel = MultiViewKernel::new(
            vec![KernelSpec::gaussian(1.5).unwrap(), KernelSpec::gaussian(0.7).unwrap()],
            vec![0..2, 2..3],
        )
        .unwrap();
        (Dataset::new(x, y).unwrap(), kernel)
    }

    fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a.kronecker(b)
    }

    #[test]
    fn weights_on_sphere() {
        let c = CombinationWeights::new(vec![3.0, 4.0], 2.0).unwrap();
        assert!((c.as_vector().norm() - 2.0).abs() < 1e-15);
        assert!(CombinationWeights::new(vec![0.0, 0.0], 1.0).is_err());
        let u = CombinationWeights::uniform(4, 1.0).unwrap();
        assert!(u.as_vector().iter().all(|&x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn single_view_b_is_masked_gram() {
        let k = DMatrix::from_fn(4, 4, |i, j| 1.0 / (1.0 + (i + j) as f64));
        let c = CombinationWeights::new(vec![1.0], 1.0).unwrap();
        let b = assemble_b(std::slice::from_ref(&k), &c, 0.0, 0.0, None, 2).unwrap();
        let mut want = k.clone();
        want.rows_mut(2, 2).fill(0.0);
        assert_eq!(b, want);
    }

    #[test]
    fn one_labeled_point_two_views() {
        let k1 = DMatrix::from_element(1, 1, 2.0);
        let k2 = DMatrix::from_element(1, 1, 3.0);
        let c = CombinationWeights::new(vec![1.0, 0.0], 1.0).unwrap();
        let b = assemble_b(&[k1, k2], &c, 0.0, 0.0, None, 1).unwrap();
        // (ccᵀ) diag(2, 3) = [[2, 0], [0, 0]]
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn b_matches_dense_kronecker_construction() {
        let (data, kernel) = two_view_data(3, 2, 1, 4);
        let v = 2;
        let all = [0, 1, 2];
        let blocks = kernel.per_view_blocks(data.points(), &all, data.points(), &all).unwrap();
        let graph = per_view_laplacians(&data, &kernel, GraphSpec::new(0.3)).unwrap();
        let c = CombinationWeights::new(vec![0.6, -0.8], 1.0).unwrap();
        let (lb, lw, m) = (0.3, 0.7, 2);
        let b = assemble_b(&blocks, &c, lb, lw, Some(&graph), m).unwrap();

        let mut j = DMatrix::zeros(3, 3);
        j[(0, 0)] = 1.0;
        j[(1, 1)] = 1.0;
        let cv = c.as_vector();
        let cct = cv * cv.transpose();
        let mv = between_view_operator(v).unwrap();
        let l = multiview_block_laplacian(&graph).unwrap();
        let g = multiview_gram(&kernel, &data, &all, &all).unwrap().values;
        let t = kron(&j, &cct) + kron(&DMatrix::identity(3, 3), &mv) * (m as f64 * lb) + l.matrix() * (m as f64 * lw);
        assert!((b - t * g).amax() < 1e-13);
    }

    #[test]
    fn degenerate_views_reduce_to_kernel_ridge() {
        let (data, _) = two_view_data(7, 7, 1, 5);
        let spec = KernelSpec::gaussian(2.0).unwrap();
        let kernel = MultiViewKernel::single(spec.clone(), 3).unwrap();
        let c = CombinationWeights::new(vec![1.0], 1.0).unwrap();
        let config = MultiViewConfig {
            lambda_a: 0.01,
            lambda_b: 0.0,
            lambda_w: 0.0,
        };
        let level = LevelSpec { kernel, landmarks: None };
        let model = fit_multiview(&data, &[level], &c, &config, None).unwrap();
        let all: Vec<usize> = (0..7).collect();
        let k = crate::kernels::gram(&spec, &data, &all, &all).unwrap();
        let want = fit_full_manifold(&k, data.labels(), 7, 0.01, 0.0, None).unwrap();
        assert!((&model.levels[0].coefficients - want).amax() < 1e-10);
    }

    #[test]
    fn zero_labels_give_zero_coefficients() {
        let (mut data, kernel) = two_view_data(6, 4, 2, 6);
        data = Dataset::new(data.points().clone(), DMatrix::zeros(4, 2)).unwrap();
        let c = CombinationWeights::uniform(2, 1.0).unwrap();
        let config = MultiViewConfig {
            lambda_a: 0.1,
            lambda_b: 0.1,
            lambda_w: 0.0,
        };
        let level = LevelSpec { kernel, landmarks: None };
        let model = fit_multiview(&data, &[level], &c, &config, None).unwrap();
        assert!(model.levels[0].coefficients.iter().all(|&x| x == 0.0));
    }

    fn perturbation_check(landmarks: Option<Vec<usize>>) {
        let (data, kernel) = two_view_data(6, 4, 3, 7);
        let graph = per_view_laplacians(&data, &kernel, GraphSpec::new(0.2)).unwrap();
        let c = CombinationWeights::new(vec![0.8, 0.6], 1.0).unwrap();
        let config = MultiViewConfig {
            lambda_a: 0.05,
            lambda_b: 0.02,
            lambda_w: 0.03,
        };
        let level = LevelSpec {
            kernel: kernel.clone(),
            landmarks: landmarks.clone(),
        };
        let model = fit_multiview(&data, &[level], &c, &config, Some(&graph)).unwrap();
        let lv = &model.levels[0];
        assert!(lv.relative_residual <= 1e-8, "{}", lv.relative_residual);
        let lm = landmarks.unwrap_or_else(|| (0..6).collect());
        let base = multiview_objective(&data, &kernel, &lm, &c, &config, Some(&graph), &lv.coefficients).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let scale = 10f64.powi(rng.random_range(-4..0));
            let delta = DMatrix::from_fn(lv.coefficients.nrows(), 3, |_, _| scale * (rng.random::<f64>() - 0.5));
            let other = multiview_objective(&data, &kernel, &lm, &c, &config, Some(&graph), &(&lv.coefficients + delta)).unwrap();
            assert!(other >= base - 1e-12 * base.abs().max(1.0), "{other} < {base}");
        }
    }

    #[test]
    fn full_solution_minimizes_objective() {
        perturbation_check(None);
    }

    #[test]
    fn nystrom_solution_minimizes_restricted_objective() {
        perturbation_check(Some(vec![1, 3, 4]));
    }

    #[test]
    fn all_landmarks_match_full_solve() {
        let (data, kernel) = two_view_data(6, 4, 2, 9);
        let graph = per_view_laplacians(&data, &kernel, GraphSpec::new(0.2)).unwrap();
        let c = CombinationWeights::new(vec![0.3, 0.9], 1.0).unwrap();
        let config = MultiViewConfig {
            lambda_a: 0.05,
            lambda_b: 0.02,
            lambda_w: 0.03,
        };
        let full = fit_multiview(&data, &[LevelSpec { kernel: kernel.clone(), landmarks: None }], &c, &config, Some(&graph)).unwrap();
        let all = LevelSpec {
            kernel,
            landmarks: Some((0..6).collect()),
        };
        let nys = fit_multiview(&data, &[all], &c, &config, Some(&graph)).unwrap();
        let a = full.scores(data.points()).unwrap();
        let b = nys.scores(data.points()).unwrap();
        assert!((&a - &b).amax() <= 1e-8 * a.amax().max(1.0));
    }

    #[test]
    fn classify_rules() {
        let s = DMatrix::from_row_slice(2, 3, &[-1.0, 1.0, -1.0, 0.5, 0.5, 0.5]);
        assert_eq!(argmax_rows(&s), vec![1, 0]);
    }

    #[test]
    fn classify_matches_explicit_assembly() {
        let (data, kernel) = two_view_data(8, 6, 3, 10);
        let c = CombinationWeights::new(vec![0.4, 0.9], 1.0).unwrap();
        let config = MultiViewConfig {
            lambda_a: 0.1,
            lambda_b: 0.01,
            lambda_w: 0.0,
        };
        let model = fit_multiview(&data, &[LevelSpec { kernel: kernel.clone(), landmarks: None }], &c, &config, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = Points::new((0..20 * 3).map(|_| rng.random::<f64>()).collect(), 3).unwrap();
        let a = &model.levels[0].coefficients;
        let qs: Vec<usize> = (0..20).collect();
        let cols: Vec<usize> = (0..8).collect();
        let g = interleave(&kernel.per_view_blocks(&q, &qs, data.points(), &cols).unwrap());
        let f = g * a; // (20·2) × 3
        let cv = c.as_vector();
        let labels = model.classify(&q).unwrap();
        for p in 0..20 {
            let cf: Vec<f64> = (0..3).map(|k| cv[0] * f[(2 * p, k)] + cv[1] * f[(2 * p + 1, k)]).collect();
            let mut best = 0;
            for k in 1..3 {
                if cf[k] > cf[best] {
                    best = k;
                }
            }
            assert_eq!(labels[p], best);
        }
    }

    fn interleave(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
        crate::kernels::interleave_views(blocks)
    }

    fn exact_and_noise_model() -> (MultiViewModel, Dataset) {
        // identity kernels on point indices: view 1 reproduces the labels,
        // view 2 is noise
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let y = DMatrix::from_fn(n, 1, |i, _| if i % 3 == 0 { 1.0 } else { -1.0 });
        let identity = KernelSpec::precomputed(DMatrix::identity(n, n)).unwrap();
        let kernel = MultiViewKernel::new(vec![identity.clone(), identity], vec![0..1, 1..2]).unwrap();
        let idx = Points::new((0..n).flat_map(|i| [i as f64, i as f64]).collect(), 2).unwrap();
        let mut coefficients = DMatrix::zeros(2 * n, 1);
        for p in 0..n {
            coefficients[(2 * p, 0)] = y[(p, 0)];
            coefficients[(2 * p + 1, 0)] = rng.random::<f64>() * 2.0 - 1.0;
        }
        let level = MultiViewLevel {
            kernel,
            landmark_indices: (0..n).collect(),
            landmark_points: idx.clone(),
            coefficients,
            relative_residual: 0.0,
        };
        let model = MultiViewModel {
            levels: vec![level],
            weights: CombinationWeights::uniform(2, 1.0).unwrap(),
            config: MultiViewConfig {
                lambda_a: 1.0,
                lambda_b: 0.0,
                lambda_w: 0.0,
            },
            classes: 1,
            lfs: None,
        };
        (model, Dataset::new(idx, y).unwrap())
    }

    #[test]
    fn informative_view_gets_larger_weight() {
        let (model, validation) = exact_and_noise_model();
        let c = optimize_combination(&model, &validation, 3).unwrap();
        let cv = c.as_vector();
        assert!(cv[0].abs() > cv[1].abs());
        assert!((cv.norm() - 1.0).abs() <= 1e-10);
        // dense scan of the circle as the oracle
        let loss = |t: f64| weight_loss(&model, &validation, &CombinationWeights::new(vec![t.cos(), t.sin()], 1.0).unwrap()).unwrap();
        let scan = (0..20_000).map(|k| loss(k as f64 * 2.0 * std::f64::consts::PI / 20_000.0)).fold(f64::INFINITY, f64::min);
        let got = weight_loss(&model, &validation, &c).unwrap();
        assert!(got <= scan + 1e-9);
    }

    #[test]
    fn optimized_loss_never_above_uniform() {
        let (data, kernel) = two_view_data(10, 8, 2, 13);
        let config = MultiViewConfig {
            lambda_a: 0.05,
            lambda_b: 0.01,
            lambda_w: 0.0,
        };
        let uniform = CombinationWeights::uniform(2, 1.0).unwrap();
        let model = fit_multiview(&data, &[LevelSpec { kernel, landmarks: None }], &uniform, &config, None).unwrap();
        let c = optimize_combination(&model, &data, 1).unwrap();
        assert!(weight_loss(&model, &data, &c).unwrap() <= weight_loss(&model, &data, &uniform).unwrap() + 1e-15);
        assert!(optimize_combination(&model, &Dataset::new(data.points().clone(), DMatrix::zeros(0, 2)).unwrap(), 1).is_err());
    }

    #[test]
    fn single_view_weight_is_alpha() {
        let (data, _) = two_view_data(6, 6, 1, 14);
        let kernel = MultiViewKernel::single(KernelSpec::gaussian(1.0).unwrap(), 3).unwrap();
        let c = CombinationWeights::new(vec![2.0], 2.0).unwrap();
        let config = MultiViewConfig {
            lambda_a: 0.1,
            lambda_b: 0.0,
            lambda_w: 0.0,
        };
        let model = fit_multiview(&data, &[LevelSpec { kernel, landmarks: None }], &c, &config, None).unwrap();
        assert_eq!(optimize_combination(&model, &data, 0).unwrap().as_vector()[0], 2.0);
    }

    #[test]
    fn levels_are_aggregated() {
        let (data, kernel) = two_view_data(12, 8, 2, 15);
        let c = CombinationWeights::uniform(2, 1.0).unwrap();
        let config = MultiViewConfig {
            lambda_a: 0.05,
            lambda_b: 0.01,
            lambda_w: 0.0,
        };
        let levels: Vec<LevelSpec> = [2usize, 6]
            .iter()
            .enumerate()
            .map(|(r, &s)| LevelSpec {
                kernel: kernel.clone(),
                landmarks: Some(crate::solver::select_landmarks(12, LandmarkSelection::Uniform { size: s, seed: r as u64 }).unwrap()),
            })
            .collect();
        let model = fit_multiview(&data, &levels, &c, &config, None).unwrap();
        let lfs = model.lfs.as_ref().unwrap();
        assert!(lfs.proxy_at_optimum() <= lfs.best_member_proxy() + 1e-12);
        let alt = fit_multiview_alternating(&data, &data, &levels, &config, None, 1.0, 3, 5).unwrap();
        assert_eq!(alt.levels.len(), 2);
    }
}
