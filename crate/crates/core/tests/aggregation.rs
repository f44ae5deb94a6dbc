mod common;

use common::*;
use mpreg::aggregation::{aggregate_lfs, combine_predictions, lfs_from_predictions};
use mpreg::kernels::KernelSpec;
use mpreg::solver::{fit_nystrom, RegularizationConfig};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lfs_proxy_is_optimal(seed in any::<u64>(), members in 1usize..5) {
        let mut r = rng(seed);
        let n = 30;
        let data = dataset(&mut r, n, 20, 2, 1);
        let kernel = KernelSpec::gaussian(3.0).unwrap();
        let config = RegularizationConfig::new(1e-3);
        let models: Vec<_> = (0..members)
            .map(|i| fit_nystrom(&data, &subset(&mut r, n, 3 + 4 * i), &kernel, &config).unwrap())
            .collect();
        let agg = aggregate_lfs(models, &data).unwrap();
        let best = agg.lfs.proxy_at_optimum();
        prop_assert!(best <= agg.lfs.best_member_proxy() + 1e-12);
        for i in 0..members {
            let mut e = DVector::zeros(members);
            e[i] = 1.0;
            prop_assert!(agg.lfs.proxy(&e) >= best - 1e-12);
        }
        for _ in 0..200 {
            let c = DVector::from_fn(members, |_, _| r.random_range(-2.0..2.0));
            prop_assert!(agg.lfs.proxy(&c) >= best - 1e-12);
        }
    }
}

#[test]
fn proxy_equals_training_error_up_to_constant() {
    let mut r = rng(2);
    let y = DMatrix::from_fn(15, 2, |_, _| r.random_range(-1.0..1.0));
    let preds: Vec<DMatrix<f64>> = (0..3).map(|_| DMatrix::from_fn(15, 2, |_, _| r.random_range(-1.0..1.0))).collect();
    let lfs = lfs_from_predictions(&preds, &y).unwrap();
    let c = DVector::from_vec(vec![0.3, -0.2, 0.7]);
    let combined = combine_predictions(&preds, &c).unwrap();
    let err = (&combined - &y).norm_squared() / 15.0;
    let constant = y.norm_squared() / 15.0;
    assert!((lfs.proxy(&c) + constant - err).abs() <= 1e-12);
}

#[test]
fn identical_members_share_the_weight() {
    let mut r = rng(4);
    let y = DMatrix::from_fn(10, 1, |_, _| r.random_range(-1.0..1.0));
    let p = DMatrix::from_fn(10, 1, |_, _| r.random_range(-1.0..1.0));
    let lfs = lfs_from_predictions(&[p.clone(), p.clone()], &y).unwrap();
    let single = lfs_from_predictions(&[p], &y).unwrap();
    assert!((lfs.cbar.sum() - single.cbar[0]).abs() <= 1e-10);
}
