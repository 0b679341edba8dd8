use serde::{Deserialize, Serialize};

use super::Example;
use crate::error::Error;

/// Per-slot standardization fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Sample standard deviation; constant slots store 1.
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

pub fn fit_scaler(examples: &[Example]) -> Result<Scaler, Error> {
    if examples.len() < 2 {
        return Err(Error::Data(format!(
            "scaler needs at least 2 records, got {}",
            examples.len()
        )));
    }
    let dim = examples[0].x.len();
    let n = examples.len() as f64;
    let mut mean = vec![0.0; dim];
    for e in examples {
        for (m, v) in mean.iter_mut().zip(&e.x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = vec![0.0; dim];
    for e in examples {
        for ((s, v), m) in std.iter_mut().zip(&e.x).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut std {
        *s = (*s / (n - 1.0)).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    Ok(Scaler { mean, std })
}
