//! L2-regularized logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticHyper {
    pub lr: f64,
    pub l2: f64,
    pub epochs: u32,
    /// Recorded for reproducibility; initialization is all zeros.
    pub seed: u64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        Self {
            lr: 0.01,
            l2: 1e-4,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticParams {
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean log-loss plus `l2 / 2 * |w|^2`.
pub fn loss(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = dot(w, x) + b;
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum();
    data / n + 0.5 * l2 * dot(w, w)
}

/// Gradient of [`loss`] with respect to the weights and the bias.
pub fn gradient(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let r = sigmoid(dot(w, x) + b) - if y { 1.0 } else { 0.0 };
        for (g, v) in gw.iter_mut().zip(x) {
            *g += r * v;
        }
        gb += r;
    }
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    (gw, gb / n)
}

pub(super) fn fit(h: &LogisticHyper, xs: &[Vec<f64>], ys: &[bool]) -> LogisticParams {
    let mut w = vec![0.0; xs[0].len()];
    let mut b = 0.0;
    for _ in 0..h.epochs {
        let (gw, gb) = gradient(&w, b, xs, ys, h.l2);
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= h.lr * g;
        }
        b -= h.lr * gb;
    }
    LogisticParams { weights: w, bias: b }
}
