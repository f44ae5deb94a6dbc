#![allow(dead_code)]

use mpreg::data::{Dataset, Points};
use mpreg::graph::{exp_weights, laplacian, GraphPenalty};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Points {
    Points::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
}

pub fn dataset(rng: &mut ChaCha8Rng, n: usize, m: usize, d: usize, p: usize) -> Dataset {
    let x = uniform_points(rng, n, d);
    let y = DMatrix::from_fn(m, p, |_, _| rng.random_range(-1.0..1.0));
    Dataset::new(x, y).unwrap()
}

pub fn unlabeled(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    Dataset::new(uniform_points(rng, n, d), DMatrix::zeros(0, 1)).unwrap()
}

pub fn exp_graph(data: &Dataset, b: f64) -> GraphPenalty {
    let all: Vec<usize> = (0..data.len()).collect();
    laplacian(&exp_weights(data, b, &all).unwrap()).unwrap()
}

/// Laplacian of a random sparse symmetric weight matrix.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> GraphPenalty {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = if rng.random_bool(0.6) { rng.random::<f64>() } else { 0.0 };
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    laplacian(&w).unwrap()
}

pub fn subset(rng: &mut ChaCha8Rng, n: usize, s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut out = idx[..s].to_vec();
    out.sort_unstable();
    out
}

pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}
