//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! Solves the dual
//!
//! ```text
//! min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! with maximal-violating-pair selection using second-order information
//! for the second index. The loop stops once the largest KKT violation
//! `m(a) - M(a)` drops below the solver tolerance, which bounds every
//! training margin's KKT error by the same amount.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Gamma, SvmParams};
use crate::fingerprint::Fnv64;
use crate::matrix::{dot, squared_distance, Matrix};

/// KKT gap at which the solver stops.
pub const SOLVER_TOLERANCE: f64 = 5e-4;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Linear => "linear",
            Kernel::Rbf => "rbf",
        }
    }
}

/// `exp(-gamma * |a - b|^2)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    libm::exp(-gamma * squared_distance(a, b))
}

/// A kernel with its parameter resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum KernelFn {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelFn {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelFn::Linear => dot(a, b),
            KernelFn::Rbf { gamma } => rbf_kernel(a, b, gamma),
        }
    }

    pub fn gram(&self, x: &Matrix) -> Vec<f64> {
        let n = x.rows();
        let mut k = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.eval(x.row(i), x.row(j));
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    }
}

/// `1 / (d * var(x))` over all entries of `x`; 1 when `x` is constant.
pub fn scale_gamma(x: &Matrix) -> f64 {
    let v = x.as_slice();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs SMO on a precomputed Gram matrix. Labels are 0/1 and mapped to ±1.
pub fn solve_dual(gram: &[f64], y: &[u8], c: f64, tolerance: f64, max_iterations: usize) -> SmoSolution {
    let n = y.len();
    let ys: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    let k = |i: usize, j: usize| gram[i * n + j];
    let mut alpha = alloc::vec![0.0; n];
    let mut grad = alloc::vec![-1.0; n];

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        // first index: maximal violation among I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], ys[t]) {
                let v = -ys[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = t;
                }
            }
        }
        // second index: largest second-order decrease among I_low
        let mut gmin = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_obj = f64::INFINITY;
        if i_sel != usize::MAX {
            let i = i_sel;
            for t in 0..n {
                if !in_low(alpha[t], ys[t]) {
                    continue;
                }
                let v = -ys[t] * grad[t];
                if v < gmin {
                    gmin = v;
                }
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = k(i, i) + k(t, t) - 2.0 * k(i, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || gmax - gmin < tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let qij = ys[i] * ys[j] * k(i, j);
        if ys[i] != ys[j] {
            let mut quad = k(i, i) + k(j, j) + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k(i, i) + k(j, j) - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let dai = alpha[i] - old_ai;
        let daj = alpha[j] - old_aj;
        for t in 0..n {
            grad[t] += ys[t] * (ys[i] * k(t, i) * dai + ys[j] * k(t, j) * daj);
        }
    }

    // rho: mean of y_i G_i over free vectors, else midpoint of the feasible range
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        if alpha[t] >= c {
            if ys[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if ys[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    SmoSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    kernel: KernelFn,
    c: f64,
    /// Support vectors (scaled space) and their coefficients `alpha_i * y_i`.
    support_vectors: Matrix,
    coefficients: Vec<f64>,
    rho: f64,
    /// Explicit primal weights for the linear kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    iterations: usize,
    converged: bool,
}

impl SvmModel {
    pub fn fit(params: &SvmParams, x: &Matrix, y: &[u8]) -> SvmModel {
        let kernel = match params.kernel {
            Kernel::Linear => KernelFn::Linear,
            Kernel::Rbf => KernelFn::Rbf {
                gamma: match params.rbf_gamma {
                    Gamma::Scale => scale_gamma(x),
                    Gamma::Fixed(g) => g,
                },
            },
        };
        let gram = kernel.gram(x);
        let n = y.len();
        let max_iterations = (100 * n).max(1_000_000);
        let sol = solve_dual(&gram, y, params.c, SOLVER_TOLERANCE, max_iterations);

        let sv: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
        let coefficients: Vec<f64> = sv
            .iter()
            .map(|&i| if y[i] == 1 { sol.alpha[i] } else { -sol.alpha[i] })
            .collect();
        let support_vectors = x.select_rows(&sv);
        let weights = (kernel == KernelFn::Linear).then(|| {
            let mut w = alloc::vec![0.0; x.cols()];
            for (row, coef) in support_vectors.iter_rows().zip(&coefficients) {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += coef * xj;
                }
            }
            w
        });
        SvmModel {
            kernel,
            c: params.c,
            support_vectors,
            coefficients,
            rho: sol.rho,
            weights,
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        if let Some(w) = &self.weights {
            return dot(w, x) - self.rho;
        }
        self.support_vectors
            .iter_rows()
            .zip(&self.coefficients)
            .map(|(sv, coef)| coef * self.kernel.eval(sv, x))
            .sum::<f64>()
            - self.rho
    }

    pub fn kernel(&self) -> KernelFn {
        self.kernel
    }

    pub fn support_vectors(&self) -> &Matrix {
        &self.support_vectors
    }

    /// `alpha_i * y_i` per support vector.
    pub fn dual_coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub(crate) fn hash_into(&self, h: &mut Fnv64) {
        match self.kernel {
            KernelFn::Linear => h.bytes(&[0]),
            KernelFn::Rbf { gamma } => {
                h.bytes(&[1]);
                h.f64(gamma);
            }
        }
        h.f64(self.c);
        h.f64s(self.support_vectors.as_slice());
        h.f64s(&self.coefficients);
        h.f64(self.rho);
    }
}
