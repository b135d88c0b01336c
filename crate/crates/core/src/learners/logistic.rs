//! L2-regularized logistic regression.
//!
//! Minimizes
//!
//! ```text
//! L(w, b) = sum_i [ log(1 + exp(z_i)) - y_i z_i ] + l2/2 * |w|^2,   z_i = w.x_i + b
//! ```
//!
//! (the intercept is not penalized) with Newton steps and Armijo
//! backtracking, so every accepted iterate lowers the loss. Iteration stops
//! when the gradient norm falls below the tolerance or the iteration budget
//! runs out.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LrParams;
use crate::fingerprint::Fnv64;
use crate::matrix::{dot, Matrix};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Loss and gradient at `params = [w_1..w_d, b]`.
pub fn loss_and_gradient(params: &[f64], x: &Matrix, y: &[u8], l2: f64) -> (f64, Vec<f64>) {
    let d = x.cols();
    let (w, b) = params.split_at(d);
    let b = b[0];
    let mut loss = 0.5 * l2 * dot(w, w);
    let mut grad = alloc::vec![0.0; d + 1];
    for (row, &yi) in x.iter_rows().zip(y) {
        let z = dot(w, row) + b;
        let yf = f64::from(yi);
        loss += softplus(z) - yf * z;
        let r = sigmoid(z) - yf;
        for j in 0..d {
            grad[j] += r * row[j];
        }
        grad[d] += r;
    }
    for j in 0..d {
        grad[j] += l2 * w[j];
    }
    (loss, grad)
}

fn loss_only(params: &[f64], x: &Matrix, y: &[u8], l2: f64) -> f64 {
    let d = x.cols();
    let (w, b) = params.split_at(d);
    let mut loss = 0.5 * l2 * dot(w, w);
    for (row, &yi) in x.iter_rows().zip(y) {
        let z = dot(w, row) + b[0];
        loss += softplus(z) - f64::from(yi) * z;
    }
    loss
}

fn hessian(params: &[f64], x: &Matrix, l2: f64) -> Vec<f64> {
    let d = x.cols();
    let m = d + 1;
    let (w, b) = params.split_at(d);
    let mut h = alloc::vec![0.0; m * m];
    let mut aug = alloc::vec![1.0; m];
    for row in x.iter_rows() {
        let p = sigmoid(dot(w, row) + b[0]);
        let s = p * (1.0 - p);
        aug[..d].copy_from_slice(row);
        for a in 0..m {
            let sa = s * aug[a];
            for c in a..m {
                h[a * m + c] += sa * aug[c];
            }
        }
    }
    for a in 0..m {
        for c in 0..a {
            h[a * m + c] = h[c * m + a];
        }
    }
    for j in 0..d {
        h[j * m + j] += l2;
    }
    h
}

/// Solves `a x = b` for symmetric positive definite `a` by Cholesky.
/// Returns `None` when `a` is not numerically positive definite.
fn cholesky_solve(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut l = alloc::vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if s <= 1e-300 {
                    return None;
                }
                l[i * m + i] = libm::sqrt(s);
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    let mut z = alloc::vec![0.0; m];
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * m + k] * z[k];
        }
        z[i] = s / l[i * m + i];
    }
    let mut out = alloc::vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = z[i];
        for k in i + 1..m {
            s -= l[k * m + i] * out[k];
        }
        out[i] = s / l[i * m + i];
    }
    Some(out)
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Result of [`train`], including the loss after every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub params: Vec<f64>,
    pub losses: Vec<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn train(params: &LrParams, x: &Matrix, y: &[u8]) -> LogisticFit {
    let d = x.cols();
    let l2 = params.l2_strength;
    let mut theta = alloc::vec![0.0; d + 1];
    let (mut loss, mut grad) = loss_and_gradient(&theta, x, y, l2);
    let mut losses = alloc::vec![loss];
    let mut iterations = 0;
    let mut converged = norm(&grad) < params.tolerance;

    while !converged && iterations < params.max_iterations {
        iterations += 1;
        let h = hessian(&theta, x, l2);
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut step = cholesky_solve(&h, &neg_grad).unwrap_or_else(|| {
            // singular Hessian (separable data, no penalty): ridge it
            let m = d + 1;
            let mut hr = h.clone();
            for a in 0..m {
                hr[a * m + a] += 1e-8 * (1.0 + hr[a * m + a]);
            }
            cholesky_solve(&hr, &neg_grad).unwrap_or_else(|| neg_grad.clone())
        });
        let mut slope = dot(&grad, &step);
        if slope >= 0.0 {
            // not a descent direction; fall back to steepest descent
            step = neg_grad;
            slope = dot(&grad, &step);
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let cand_loss = loss_only(&candidate, x, y, l2);
            if cand_loss <= loss + 1e-4 * t * slope {
                theta = candidate;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        let (new_loss, new_grad) = loss_and_gradient(&theta, x, y, l2);
        loss = new_loss;
        grad = new_grad;
        losses.push(loss);
        converged = norm(&grad) < params.tolerance;
    }

    LogisticFit {
        params: theta,
        losses,
        gradient_norm: norm(&grad),
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    weights: Vec<f64>,
    intercept: f64,
    #[serde(default)]
    iterations: usize,
    #[serde(default)]
    converged: bool,
}

impl LogisticModel {
    pub fn fit(params: &LrParams, x: &Matrix, y: &[u8]) -> Self {
        let fit = train(params, x, y);
        let d = x.cols();
        LogisticModel {
            weights: fit.params[..d].to_vec(),
            intercept: fit.params[d],
            iterations: fit.iterations,
            converged: fit.converged,
        }
    }

    pub fn from_parts(weights: Vec<f64>, intercept: f64) -> Self {
        LogisticModel {
            weights,
            intercept,
            iterations: 0,
            converged: true,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.intercept)
    }

    pub(crate) fn hash_into(&self, h: &mut Fnv64) {
        h.f64s(&self.weights);
        h.f64(self.intercept);
    }
}
