use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::SelectionError;
use crate::seed::rng_from_seed;

pub const DEFAULT_FOLDS: usize = 10;

/// Assignment of `n` records to `k` folds.
///
/// Records are shuffled by `seed` and the permutation is cut into `k`
/// contiguous blocks; the first `n % k` blocks hold one extra record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan, SelectionError> {
    if k == 0 || n < k {
        return Err(SelectionError::TooFewRows { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let base = n / k;
    let extra = n % k;
    let mut assignment = alloc::vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &r in &order[pos..pos + size] {
            assignment[r] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan { n, k, seed, assignment })
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}
