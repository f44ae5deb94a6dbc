mod common;

use common::*;
use mpreg::data::{one_hot_labels, Dataset};
use mpreg::graph::GraphSpec;
use mpreg::kernels::{KernelSpec, MultiViewKernel};
use mpreg::multiview::{
    fit_multiview, multiview_objective, optimize_combination, per_view_laplacians, weight_loss, CombinationWeights, LevelSpec, MultiViewConfig,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn two_view_problem(seed: u64, n: usize, m: usize, gamma: f64) -> (Dataset, MultiViewKernel) {
    let mut r = rng(seed);
    let x = uniform_points(&mut r, n, 3);
    let classes: Vec<usize> = (0..m).map(|i| usize::from(x.row(i)[0] > 0.5)).collect();
    let data = Dataset::new(x, one_hot_labels(&classes, 2).unwrap()).unwrap();
    let kernel = MultiViewKernel::new(vec![KernelSpec::gaussian(2.0 * gamma).unwrap(), KernelSpec::gaussian(gamma).unwrap()], vec![0..1, 1..3]).unwrap();
    (data, kernel)
}

const CONFIG: MultiViewConfig = MultiViewConfig {
    lambda_a: 1e-3,
    lambda_b: 1e-4,
    lambda_w: 1e-4,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn all_landmarks_equal_the_full_solve(seed in any::<u64>(), n in 4usize..14, c0 in 0.1f64..1.0) {
        let m = n / 2 + 1;
        // narrow kernels keep the per-view Gram matrices well conditioned
        let (data, kernel) = two_view_problem(seed, n, m, 30.0);
        let graph = per_view_laplacians(&data, &kernel, GraphSpec::new(0.2)).unwrap();
        let weights = CombinationWeights::new(vec![c0, 1.0 - c0 + 0.1], 1.0).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let full = fit_multiview(&data, &[LevelSpec { kernel: kernel.clone(), landmarks: None }], &weights, &CONFIG, Some(&graph)).unwrap();
        let nys = fit_multiview(&data, &[LevelSpec { kernel, landmarks: Some(all) }], &weights, &CONFIG, Some(&graph)).unwrap();
        let query = uniform_points(&mut rng(seed ^ 7), 10, 3);
        let d = rel_diff(&nys.scores(&query).unwrap(), &full.scores(&query).unwrap());
        prop_assert!(d <= 1e-6, "deviation {d}");
    }

    #[test]
    fn landmark_solution_minimizes_the_objective(seed in any::<u64>(), n in 5usize..12) {
        let m = n - 2;
        let (data, kernel) = two_view_problem(seed, n, m, 1.0);
        let graph = per_view_laplacians(&data, &kernel, GraphSpec::new(0.2)).unwrap();
        let weights = CombinationWeights::uniform(2, 1.0).unwrap();
        let landmarks = subset(&mut rng(seed ^ 3), n, n / 2);
        let level = LevelSpec { kernel: kernel.clone(), landmarks: Some(landmarks.clone()) };
        let model = fit_multiview(&data, &[level], &weights, &CONFIG, Some(&graph)).unwrap();
        let a = &model.levels[0].coefficients;
        let at = |a: &DMatrix<f64>| multiview_objective(&data, &kernel, &landmarks, &weights, &CONFIG, Some(&graph), a).unwrap();
        let best = at(a);
        let mut r = rng(seed ^ 5);
        for _ in 0..20 {
            let step = DMatrix::from_fn(a.nrows(), a.ncols(), |_, _| r.random_range(-1e-3..1e-3));
            prop_assert!(at(&(a + step)) >= best - 1e-12 * best.abs().max(1.0));
        }
    }
}

#[test]
fn optimized_weights_do_not_lose_to_uniform() {
    let (data, kernel) = two_view_problem(21, 40, 30, 1.0);
    let validation = data.select(&(0..30).collect::<Vec<_>>(), 30).unwrap();
    let uniform = CombinationWeights::uniform(2, 1.0).unwrap();
    let model = fit_multiview(&data, &[LevelSpec { kernel, landmarks: Some((0..40).step_by(2).collect()) }], &uniform, &MultiViewConfig { lambda_w: 0.0, ..CONFIG }, None).unwrap();
    let tuned = optimize_combination(&model, &validation, 1).unwrap();
    assert!((tuned.as_vector().norm() - 1.0).abs() <= 1e-12);
    assert!(weight_loss(&model, &validation, &tuned).unwrap() <= weight_loss(&model, &validation, &uniform).unwrap() + 1e-12);
}

#[test]
fn weights_live_on_the_sphere() {
    let w = CombinationWeights::new(vec![3.0, 4.0], 2.0).unwrap();
    assert!((w.as_vector() - nalgebra::DVector::from_vec(vec![1.2, 1.6])).amax() <= 1e-15);
    assert!(CombinationWeights::new(vec![0.0, 0.0], 1.0).is_err());
    assert!(CombinationWeights::new(vec![1.0], 0.0).is_err());
}
