//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesHyper {
    pub var_floor: f64,
}

impl Default for BayesHyper {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

/// Index 0 is the negative class, index 1 the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesParams {
    pub prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl BayesParams {
    pub fn log_joint(&self, class: usize, x: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.prior[class].ln()
            + x.iter()
                .zip(self.mean[class].iter().zip(&self.var[class]))
                .map(|(v, (m, s2))| -0.5 * (ln_2pi + s2.ln()) - (v - m) * (v - m) / (2.0 * s2))
                .sum::<f64>()
    }

    /// Posterior of the positive class, normalized with log-sum-exp.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let l0 = self.log_joint(0, x);
        let l1 = self.log_joint(1, x);
        let top = l0.max(l1);
        let e0 = (l0 - top).exp();
        let e1 = (l1 - top).exp();
        e1 / (e0 + e1)
    }
}

pub(super) fn fit(h: &BayesHyper, xs: &[Vec<f64>], ys: &[bool]) -> BayesParams {
    let dim = xs[0].len();
    let mut count = [0usize; 2];
    let mut mean = [vec![0.0; dim], vec![0.0; dim]];
    for (x, &y) in xs.iter().zip(ys) {
        let c = y as usize;
        count[c] += 1;
        for (m, v) in mean[c].iter_mut().zip(x) {
            *m += v;
        }
    }
    for c in 0..2 {
        mean[c].iter_mut().for_each(|m| *m /= count[c] as f64);
    }
    let mut var = [vec![0.0; dim], vec![0.0; dim]];
    for (x, &y) in xs.iter().zip(ys) {
        let c = y as usize;
        for ((s, v), m) in var[c].iter_mut().zip(x).zip(&mean[c]) {
            *s += (v - m) * (v - m);
        }
    }
    for c in 0..2 {
        var[c]
            .iter_mut()
            .for_each(|s| *s = (*s / count[c] as f64).max(h.var_floor));
    }
    let n = xs.len() as f64;
    BayesParams {
        prior: [count[0] as f64 / n, count[1] as f64 / n],
        mean,
        var,
    }
}
