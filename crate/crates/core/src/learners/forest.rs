//! Bagged CART trees with Gini impurity.
//!
//! Each tree sees a bootstrap sample of the training rows and considers
//! `ceil(sqrt(d))` randomly chosen features per split. When none of those
//! features can split an impure node the search continues through the
//! remaining features, so on data without conflicting duplicates an
//! unlimited-depth tree always ends with pure leaves.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RfParams;
use crate::fingerprint::Fnv64;
use crate::matrix::Matrix;
use crate::seed::{rng_from_seed, splitmix64};

const LEAF: u16 = u16::MAX;

/// `(feature, threshold, left, right)`; leaves store `feature = u16::MAX`
/// and their label in `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode(u16, f64, u32, u32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut i = 0usize;
        loop {
            let TreeNode(feature, threshold, left, right) = self.nodes[i];
            if feature == LEAF {
                return threshold as u8;
            }
            i = if x[feature as usize] <= threshold { left as usize } else { right as usize };
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            let TreeNode(f, _, l, r) = nodes[i];
            if f == LEAF {
                0
            } else {
                1 + walk(nodes, l as usize).max(walk(nodes, r as usize))
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
}

struct Split {
    feature: usize,
    threshold: f64,
    /// Weighted Gini of the two children, scaled by node size.
    score: f64,
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    max_depth: Option<usize>,
    max_features: usize,
    nodes: Vec<TreeNode>,
    scratch: Vec<(f64, u8)>,
    features: Vec<usize>,
}

fn gini_sum(pos: usize, n: usize) -> f64 {
    // n * gini = n * (1 - p^2 - q^2) = 2 * pos * neg / n
    if n == 0 {
        return 0.0;
    }
    2.0 * pos as f64 * (n - pos) as f64 / n as f64
}

impl TreeBuilder<'_> {
    fn best_split_on(&mut self, rows: &[usize], feature: usize, total_pos: usize) -> Option<Split> {
        self.scratch.clear();
        self.scratch
            .extend(rows.iter().map(|&r| (self.x.get(r, feature), self.y[r])));
        self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.scratch.len();
        let mut best: Option<Split> = None;
        let mut left_pos = 0usize;
        for i in 0..n - 1 {
            left_pos += self.scratch[i].1 as usize;
            let (a, b) = (self.scratch[i].0, self.scratch[i + 1].0);
            if a == b {
                continue;
            }
            let left_n = i + 1;
            let score = gini_sum(left_pos, left_n) + gini_sum(total_pos - left_pos, n - left_n);
            if best.as_ref().map_or(true, |s| score < s.score) {
                best = Some(Split {
                    feature,
                    threshold: a + (b - a) / 2.0,
                    score,
                });
            }
        }
        best
    }

    fn leaf(&mut self, pos: usize, n: usize) -> u32 {
        // majority label; an even split goes to 0
        let label = if 2 * pos > n { 1.0 } else { 0.0 };
        self.nodes.push(TreeNode(LEAF, label, 0, 0));
        (self.nodes.len() - 1) as u32
    }

    fn build(&mut self, rows: &mut [usize], depth: usize, rng: &mut impl Rng) -> u32 {
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        if pos == 0 || pos == n || self.max_depth.is_some_and(|d| depth >= d) {
            return self.leaf(pos, n);
        }

        self.features.shuffle(rng);
        let mut best: Option<Split> = None;
        for k in 0..self.features.len() {
            if k >= self.max_features && best.is_some() {
                break;
            }
            let feature = self.features[k];
            if let Some(s) = self.best_split_on(rows, feature, pos) {
                if best.as_ref().map_or(true, |b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else {
            return self.leaf(pos, n);
        };

        // partition rows: left = value <= threshold
        let mut mid = 0;
        for i in 0..n {
            if self.x.get(rows[i], split.feature) <= split.threshold {
                rows.swap(i, mid);
                mid += 1;
            }
        }
        let id = self.nodes.len();
        self.nodes.push(TreeNode(split.feature as u16, split.threshold, 0, 0));
        let (left_rows, right_rows) = rows.split_at_mut(mid);
        let left = self.build(left_rows, depth + 1, rng);
        let right = self.build(right_rows, depth + 1, rng);
        self.nodes[id].2 = left;
        self.nodes[id].3 = right;
        id as u32
    }
}

impl Forest {
    pub fn fit(params: &RfParams, x: &Matrix, y: &[u8], seed: u64) -> Forest {
        let n = x.rows();
        let d = x.cols();
        let max_features = (libm::ceil(libm::sqrt(d as f64)) as usize).clamp(1, d.max(1));
        let trees = (0..params.n_estimators)
            .map(|t| {
                let mut rng = rng_from_seed(splitmix64(seed ^ splitmix64(t as u64)));
                let mut rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut builder = TreeBuilder {
                    x,
                    y,
                    max_depth: params.max_depth,
                    max_features,
                    nodes: Vec::new(),
                    scratch: Vec::with_capacity(n),
                    features: (0..d).collect(),
                };
                builder.build(&mut rows, 0, &mut rng);
                Tree { nodes: builder.nodes }
            })
            .collect();
        Forest { trees }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Fraction of trees voting 1.
    pub fn vote_fraction(&self, x: &[f64]) -> f64 {
        let votes: usize = self.trees.iter().map(|t| t.predict(x) as usize).sum();
        votes as f64 / self.trees.len() as f64
    }

    pub(crate) fn hash_into(&self, h: &mut Fnv64) {
        h.usize(self.trees.len());
        for t in &self.trees {
            h.usize(t.nodes.len());
            for TreeNode(f, thr, l, r) in &t.nodes {
                h.u64(u64::from(*f));
                h.f64(*thr);
                h.u64(u64::from(*l) << 32 | u64::from(*r));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{fit, LearnerSpec};

    fn params(n: usize, depth: Option<usize>) -> RfParams {
        RfParams {
            n_estimators: n,
            max_depth: depth,
            seed: None,
        }
    }

    #[test]
    fn single_tree_on_separable_data_is_pure() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let y = [0, 0, 1, 1];
        let f = Forest::fit(&params(1, None), &x, &y, 3);
        let t = &f.trees()[0];
        // a bootstrap sample of a 1-D threshold problem never needs more than one split
        assert!(t.depth() <= 1);
    }

    #[test]
    fn depth_limit_is_respected() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [(i % 7) as f64, (i % 5) as f64]).collect();
        let y: Vec<u8> = (0..40).map(|i| ((i * 7919) % 3 == 0) as u8).collect();
        let x = Matrix::from_rows(&rows);
        let f = Forest::fit(&params(5, Some(2)), &x, &y, 1);
        assert!(f.trees().iter().all(|t| t.depth() <= 2));
    }

    #[test]
    fn unanimous_trees_give_extreme_vote_fractions() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [5.0, 5.0], [5.0, 4.0]]);
        let m = fit(&LearnerSpec::rf(15), &x, &[0, 0, 1, 1], 2).unwrap();
        let v = m.decision_value(&[5.0, 5.0]).unwrap();
        assert!(v == 0.0 || v == 1.0);
    }

    #[test]
    fn same_seed_same_forest() {
        let rows: Vec<[f64; 3]> = (0..30).map(|i| [(i % 6) as f64, (i % 4) as f64, (i % 5) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| (i % 6 + i % 4 > 4) as u8).collect();
        let x = Matrix::from_rows(&rows);
        let a = Forest::fit(&params(10, None), &x, &y, 42);
        let b = Forest::fit(&params(10, None), &x, &y, 42);
        let c = Forest::fit(&params(10, None), &x, &y, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
