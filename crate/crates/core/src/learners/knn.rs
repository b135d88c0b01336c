//! Brute-force k-nearest neighbours under Euclidean distance.
//!
//! Neighbours at equal distance are admitted by ascending training index.
//! The positive vote fraction must exceed one half for label 1, so an even
//! split votes 0.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fingerprint::Fnv64;
use crate::matrix::{squared_distance, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    x: Matrix,
    y: Vec<u8>,
}

impl KnnModel {
    pub fn fit(k: usize, x: Matrix, y: Vec<u8>) -> Self {
        KnnModel { k, x, y }
    }

    /// Training indices of the `k` nearest points, nearest first.
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, row)| (squared_distance(row, query), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn vote_fraction(&self, query: &[f64]) -> f64 {
        let nn = self.neighbors(query);
        let pos = nn.iter().filter(|&&i| self.y[i] == 1).count();
        pos as f64 / nn.len() as f64
    }

    pub(crate) fn hash_into(&self, h: &mut Fnv64) {
        h.usize(self.k);
        h.f64s(self.x.as_slice());
        h.bytes(&self.y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_returns_label_of_identical_point() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 2.0], [3.0, 1.0]]);
        let m = KnnModel::fit(1, x, alloc::vec![0, 1, 0]);
        assert_eq!(m.vote_fraction(&[1.0, 2.0]), 1.0);
        assert_eq!(m.vote_fraction(&[3.0, 1.0]), 0.0);
    }

    #[test]
    fn equidistant_neighbours_taken_by_index() {
        // all four points at distance 1 from the origin
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]);
        let m = KnnModel::fit(3, x, alloc::vec![1, 0, 1, 1]);
        assert_eq!(m.neighbors(&[0.0, 0.0]), alloc::vec![0, 1, 2]);
    }

    #[test]
    fn k_larger_than_training_set_uses_all_points() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]);
        let m = KnnModel::fit(5, x, alloc::vec![1, 0]);
        // 1 of 2 is not a majority
        assert_eq!(m.vote_fraction(&[0.0]), 0.5);
    }
}
