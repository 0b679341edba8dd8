//! Binary classifiers over fragment feature vectors: logistic regression,
//! random forest and Gaussian naive Bayes, plus evaluation and model files.

pub mod bayes;
pub mod eval;
pub mod forest;
pub mod logistic;
pub mod scaler;
pub mod synthetic;

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::metrics::CATALOG_VERSION;
use crate::miner::DatasetRecord;

pub use bayes::{BayesHyper, BayesParams};
pub use eval::{bootstrap_eval, evaluate, evaluate_scores, pr_auc, BootstrapStats, Confusion, EvalReport, Metrics};
pub use forest::{ForestHyper, ForestParams, Node, Tree};
pub use logistic::{LogisticHyper, LogisticParams};
pub use scaler::{fit_scaler, Scaler};

pub const MODEL_FORMAT: &str = "pastewatch-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A labelled feature vector. Unlike [`crate::metrics::FeatureVector`] the
/// values are unconstrained, which keeps the trainers usable on arbitrary
/// numeric data.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vec<f64>,
    pub label: bool,
}

impl Example {
    pub fn new(x: Vec<f64>, label: bool) -> Self {
        Self { x, label }
    }
}

impl From<&DatasetRecord> for Example {
    fn from(r: &DatasetRecord) -> Self {
        Example::new(r.features.as_slice().to_vec(), r.label)
    }
}

pub fn examples_of(records: &[DatasetRecord]) -> Vec<Example> {
    records.iter().map(Example::from).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Logistic,
    Forest,
    Bayes,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Forest => "forest",
            ModelKind::Bayes => "bayes",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "logistic" => Ok(ModelKind::Logistic),
            "forest" => Ok(ModelKind::Forest),
            "bayes" => Ok(ModelKind::Bayes),
            _ => Err(Error::Data(format!("unknown model kind `{s}`"))),
        }
    }
}

/// Trainer choice together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Hyper {
    Logistic(LogisticHyper),
    Forest(ForestHyper),
    Bayes(BayesHyper),
}

impl Hyper {
    pub fn default_for(kind: ModelKind, seed: u64) -> Self {
        match kind {
            ModelKind::Logistic => Hyper::Logistic(LogisticHyper { seed, ..Default::default() }),
            ModelKind::Forest => Hyper::Forest(ForestHyper { seed, ..Default::default() }),
            ModelKind::Bayes => Hyper::Bayes(BayesHyper::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Hyper::Logistic(_) => ModelKind::Logistic,
            Hyper::Forest(_) => ModelKind::Forest,
            Hyper::Bayes(_) => ModelKind::Bayes,
        }
    }

    /// Same hyperparameters with the seed replaced (a no-op for Bayes).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut h = self.clone();
        match &mut h {
            Hyper::Logistic(l) => l.seed = seed,
            Hyper::Forest(f) => f.seed = seed,
            Hyper::Bayes(_) => {}
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Params {
    Logistic(LogisticParams),
    Forest(ForestParams),
    Bayes(BayesParams),
}

impl Params {
    fn kind(&self) -> ModelKind {
        match self {
            Params::Logistic(_) => ModelKind::Logistic,
            Params::Forest(_) => ModelKind::Forest,
            Params::Bayes(_) => ModelKind::Bayes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format: String,
    pub format_version: u32,
    pub catalog_version: u32,
    pub dim: usize,
    pub hyper: Hyper,
    pub scaler: Scaler,
    pub params: Params,
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        self.hyper.kind()
    }

    /// A logistic model that ignores its input and always answers `p`.
    /// Useful as a baseline and for exercising the engine.
    pub fn constant(p: f64, dim: usize) -> Result<Self, Error> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Data(format!("constant probability must lie in (0, 1), got {p}")));
        }
        Ok(Model {
            format: MODEL_FORMAT.into(),
            format_version: MODEL_FORMAT_VERSION,
            catalog_version: CATALOG_VERSION,
            dim,
            hyper: Hyper::Logistic(LogisticHyper { epochs: 0, ..Default::default() }),
            scaler: Scaler {
                mean: vec![0.0; dim],
                std: vec![1.0; dim],
            },
            params: Params::Logistic(LogisticParams {
                weights: vec![0.0; dim],
                bias: (p / (1.0 - p)).ln(),
            }),
        })
    }

    /// Probability that the example belongs to the positive class.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, Error> {
        if self.catalog_version != CATALOG_VERSION {
            return Err(Error::CatalogVersion {
                expected: CATALOG_VERSION,
                found: self.catalog_version,
            });
        }
        if x.len() != self.dim {
            return Err(Error::Contract(format!(
                "model expects {} features, got {}",
                self.dim,
                x.len()
            )));
        }
        let z = self.scaler.transform(x);
        let p = match &self.params {
            Params::Logistic(p) => p.predict(&z),
            Params::Forest(p) => p.predict(&z),
            Params::Bayes(p) => p.predict(&z),
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// Canonical JSON: sorted keys, shortest round-trip numbers.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("model serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::ModelFormat(format!("not a model file: {e}")))?;
        if v.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
            return Err(Error::ModelFormat("missing `pastewatch-model` format tag".into()));
        }
        let version = |key: &str| {
            v.get(key)
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::ModelFormat(format!("missing {key}")))
        };
        let fv = version("format_version")?;
        if fv != MODEL_FORMAT_VERSION as u64 {
            return Err(Error::ModelFormat(format!(
                "format version {fv} is not supported (expected {MODEL_FORMAT_VERSION})"
            )));
        }
        let cv = version("catalog_version")?;
        if cv != CATALOG_VERSION as u64 {
            return Err(Error::CatalogVersion {
                expected: CATALOG_VERSION,
                found: cv as u32,
            });
        }
        let m: Model = serde_json::from_value(v).map_err(|e| Error::ModelFormat(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::ModelFormat(what.to_string()));
        if self.hyper.kind() != self.params.kind() {
            return bad("hyperparameters and parameters disagree on the model kind");
        }
        if self.scaler.mean.len() != self.dim || self.scaler.std.len() != self.dim {
            return bad("scaler dimension differs from model dimension");
        }
        let ok = match &self.params {
            Params::Logistic(p) => p.weights.len() == self.dim,
            Params::Forest(p) => p.validate(self.dim),
            Params::Bayes(p) => p.mean.iter().chain(&p.var).all(|v| v.len() == self.dim),
        };
        if !ok {
            return bad("parameters are inconsistent with the model dimension");
        }
        Ok(())
    }
}

pub fn save_model(model: &Model, path: &Path) -> Result<(), Error> {
    std::fs::write(path, model.to_json() + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Model::from_json(&text)
}

fn cmp_examples(a: &Example, b: &Example) -> Ordering {
    a.label.cmp(&b.label).then_with(|| {
        a.x.iter()
            .zip(&b.x)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Checks the training preconditions and returns the examples in a
/// canonical order, so that trained models never depend on input order.
fn prepare(examples: &[Example]) -> Result<Vec<Example>, Error> {
    let dim = examples.first().map_or(0, |e| e.x.len());
    if dim == 0 {
        return Err(Error::Data("no training examples".into()));
    }
    if examples.iter().any(|e| e.x.len() != dim) {
        return Err(Error::Data("examples have differing dimensions".into()));
    }
    if examples.iter().any(|e| e.x.iter().any(|v| !v.is_finite())) {
        return Err(Error::Data("non-finite feature value".into()));
    }
    let pos = examples.iter().filter(|e| e.label).count();
    if pos == 0 || pos == examples.len() {
        return Err(Error::Data("both classes must be present".into()));
    }
    let mut sorted = examples.to_vec();
    sorted.sort_by(cmp_examples);
    Ok(sorted)
}

pub fn train(hyper: &Hyper, examples: &[Example]) -> Result<Model, Error> {
    let sorted = prepare(examples)?;
    let scaler = fit_scaler(&sorted)?;
    let xs: Vec<Vec<f64>> = sorted.iter().map(|e| scaler.transform(&e.x)).collect();
    let ys: Vec<bool> = sorted.iter().map(|e| e.label).collect();
    let params = match hyper {
        Hyper::Logistic(h) => Params::Logistic(logistic::fit(h, &xs, &ys)),
        Hyper::Forest(h) => Params::Forest(forest::fit(h, &xs, &ys)?),
        Hyper::Bayes(h) => Params::Bayes(bayes::fit(h, &xs, &ys)),
    };
    Ok(Model {
        format: MODEL_FORMAT.into(),
        format_version: MODEL_FORMAT_VERSION,
        catalog_version: CATALOG_VERSION,
        dim: xs[0].len(),
        hyper: hyper.clone(),
        scaler,
        params,
    })
}

pub fn train_logistic(examples: &[Example], hyper: LogisticHyper) -> Result<Model, Error> {
    train(&Hyper::Logistic(hyper), examples)
}

pub fn train_forest(examples: &[Example], hyper: ForestHyper) -> Result<Model, Error> {
    train(&Hyper::Forest(hyper), examples)
}

pub fn train_bayes(examples: &[Example]) -> Result<Model, Error> {
    train(&Hyper::Bayes(BayesHyper::default()), examples)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests;
