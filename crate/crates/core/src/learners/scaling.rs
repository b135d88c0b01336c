use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fingerprint::Fnv64;
use crate::matrix::Matrix;

/// Per-feature standardization frozen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scaling {
    Identity,
    /// `(x - mean) / scale`; `scale` is the population standard deviation,
    /// or 1 for constant columns.
    Standardize { mean: Vec<f64>, scale: Vec<f64> },
}

impl Scaling {
    /// Identity when every entry is 0 or 1, otherwise column standardization.
    pub fn fit(x: &Matrix) -> Scaling {
        if x.as_slice().iter().all(|&v| v == 0.0 || v == 1.0) {
            return Scaling::Identity;
        }
        let n = x.rows() as f64;
        let d = x.cols();
        let mut mean = alloc::vec![0.0; d];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for row in x.iter_rows() {
            for j in 0..d {
                let c = row[j] - mean[j];
                var[j] += c * c;
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let s = libm::sqrt(v / n);
                if s > 0.0 { s } else { 1.0 }
            })
            .collect();
        Scaling::Standardize { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Identity => x.to_vec(),
            Scaling::Standardize { mean, scale } => x
                .iter()
                .zip(mean)
                .zip(scale)
                .map(|((v, m), s)| (v - m) / s)
                .collect(),
        }
    }

    pub fn transform_matrix(&self, x: &Matrix) -> Matrix {
        match self {
            Scaling::Identity => x.clone(),
            Scaling::Standardize { .. } => {
                let mut out = x.clone();
                for i in 0..x.rows() {
                    let t = self.transform(x.row(i));
                    out.row_mut(i).copy_from_slice(&t);
                }
                out
            }
        }
    }

    pub(crate) fn hash_into(&self, h: &mut Fnv64) {
        match self {
            Scaling::Identity => h.bytes(&[0]),
            Scaling::Standardize { mean, scale } => {
                h.bytes(&[1]);
                h.f64s(mean);
                h.f64s(scale);
            }
        }
    }
}
