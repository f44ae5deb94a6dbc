use super::{Dataset, Points};
use crate::error::{Error, Result};
use crate::kernels::{cross_gram, KernelSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Planted regression function `f_H = Σ a_i K(·, z_i)` plus Gaussian label
/// noise.
#[derive(Debug, Clone)]
pub struct SyntheticTarget {
    anchors: Points,
    amplitudes: Vec<f64>,
    kernel: KernelSpec,
    noise_sigma: f64,
}

impl SyntheticTarget {
    pub fn new(anchors: Points, amplitudes: Vec<f64>, kernel: KernelSpec, noise_sigma: f64) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::EmptyInput("synthetic anchors"));
        }
        if amplitudes.len() != anchors.len() {
            return Err(Error::DimensionMismatch {
                expected: anchors.len(),
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("amplitudes"));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sigma must be nonnegative, got {noise_sigma}")));
        }
        if kernel.is_precomputed() {
            return Err(Error::InvalidParameter("synthetic targets need a closed-form kernel".into()));
        }
        Ok(Self {
            anchors,
            amplitudes,
            kernel,
            noise_sigma,
        })
    }

    /// `k` anchors uniform on `[0,1]^d` with amplitudes uniform on `[−1, 1]`.
    pub fn random(k: usize, d: usize, kernel: KernelSpec, noise_sigma: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let anchors = Points::new((0..k * d).map(|_| rng.random::<f64>()).collect(), d)?;
        let amplitudes = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self::new(anchors, amplitudes, kernel, noise_sigma)
    }

    pub fn dim(&self) -> usize {
        self.anchors.dim()
    }

    pub fn anchors(&self) -> &Points {
        &self.anchors
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// `f_H` at every query point.
    pub fn eval(&self, query: &Points) -> Result<Vec<f64>> {
        let k = cross_gram(&self.kernel, query, &self.anchors)?;
        let a = DMatrix::from_column_slice(self.amplitudes.len(), 1, &self.amplitudes);
        Ok((k * a).as_slice().to_vec())
    }

    /// Squared RKHS norm `aᵀ K_zz a`.
    pub fn rkhs_norm_squared(&self) -> Result<f64> {
        let k = cross_gram(&self.kernel, &self.anchors, &self.anchors)?;
        let a = DMatrix::from_column_slice(self.amplitudes.len(), 1, &self.amplitudes);
        Ok((a.transpose() * k * &a)[(0, 0)])
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSample {
    /// `n` points, the first `m` with noisy labels.
    pub dataset: Dataset,
    /// Noiseless `f_H` at all `n` points.
    pub truth: Vec<f64>,
}

/// Draws `n` inputs uniform on `[0,1]^d` and labels the first `m` with
/// `f_H(x) + N(0, σ²)`.
pub fn gen_synthetic(target: &SyntheticTarget, m: usize, n: usize, seed: u64) -> Result<SyntheticSample> {
    if m > n {
        return Err(Error::InvalidParameter(format!("{m} labeled of {n} points")));
    }
    let d = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Points::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d)?;
    let truth = target.eval(&x)?;
    let noise = Normal::new(0.0, target.noise_sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let y: Vec<f64> = truth[..m]
        .iter()
        .map(|&f| if target.noise_sigma > 0.0 { f + noise.sample(&mut rng) } else { f })
        .collect();
    let dataset = Dataset::new(x, DMatrix::from_column_slice(m, 1, &y))?;
    Ok(SyntheticSample { dataset, truth })
}
