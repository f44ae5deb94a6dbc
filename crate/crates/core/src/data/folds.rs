use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldScheme {
    /// Contiguous blocks in file order.
    PaperSequential,
    /// Blocks over a seeded permutation of `0..n`.
    Shuffled(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `k` blocks of `n / k` indices, the remainder going to the last block.
fn blocks(n: usize, k: usize, scheme: FoldScheme) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("{k} folds for {n} points")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let FoldScheme::Shuffled(seed) = scheme {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let size = n / k;
    Ok((0..k)
        .map(|i| {
            let end = if i + 1 == k { n } else { (i + 1) * size };
            order[i * size..end].to_vec()
        })
        .collect())
}

/// Standard k-fold cross-validation: fold `i` tests on block `i` and trains
/// on the rest.
pub fn kfold_split(n: usize, k: usize, scheme: FoldScheme) -> Result<Vec<Fold>> {
    let blocks = blocks(n, k, scheme)?;
    Ok((0..k)
        .map(|i| Fold {
            train: blocks
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, b)| b.iter().copied())
                .collect(),
            test: blocks[i].clone(),
        })
        .collect())
}

/// Sequential blocks where each of the first `k − 1` blocks is a training
/// set of its own and the last block is the common test set.
pub fn paper_protocol(n: usize, k: usize) -> Result<Vec<Fold>> {
    let mut blocks = blocks(n, k, FoldScheme::PaperSequential)?;
    let test = blocks.pop().expect("k >= 2");
    Ok(blocks
        .into_iter()
        .map(|train| Fold {
            train,
            test: test.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sequential_pairs() {
        let folds = kfold_split(10, 5, FoldScheme::PaperSequential).unwrap();
        assert_eq!(folds.len(), 5);
        assert_eq!(folds[0].test, vec![0, 1]);
        assert_eq!(folds[1].test, vec![2, 3]);
        assert_eq!(folds[4].test, vec![8, 9]);
        assert_eq!(folds[0].train, (2..10).collect::<Vec<_>>());
    }

    #[test]
    fn remainder_goes_last() {
        let folds = kfold_split(11, 3, FoldScheme::PaperSequential).unwrap();
        assert_eq!(folds[2].test, vec![6, 7, 8, 9, 10]);
    }

    #[test]
    fn nslkdd_block_size() {
        let folds = kfold_split(25000, 10, FoldScheme::PaperSequential).unwrap();
        assert!(folds.iter().all(|f| f.test.len() == 2500));
        let paper = paper_protocol(25000, 10).unwrap();
        assert_eq!(paper.len(), 9);
        assert_eq!(paper[3].train, (7500..10000).collect::<Vec<_>>());
        assert!(paper.iter().all(|f| f.test == (22500..25000).collect::<Vec<_>>()));
    }

    #[test]
    fn shuffled_is_deterministic() {
        let a = kfold_split(30, 4, FoldScheme::Shuffled(9)).unwrap();
        let b = kfold_split(30, 4, FoldScheme::Shuffled(9)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, kfold_split(30, 4, FoldScheme::PaperSequential).unwrap());
    }

    #[test]
    fn bad_fold_counts() {
        assert!(kfold_split(10, 1, FoldScheme::PaperSequential).is_err());
        assert!(kfold_split(3, 4, FoldScheme::PaperSequential).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition(n in 2usize..200, k in 2usize..12, seed in any::<u64>(), shuffled in any::<bool>()) {
            prop_assume!(k <= n);
            let scheme = if shuffled { FoldScheme::Shuffled(seed) } else { FoldScheme::PaperSequential };
            let folds = kfold_split(n, k, scheme).unwrap();
            let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.iter().copied()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            for f in &folds {
                let mut both: Vec<usize> = f.train.iter().chain(&f.test).copied().collect();
                both.sort_unstable();
                prop_assert_eq!(both, (0..n).collect::<Vec<_>>());
            }
        }
    }
}
