//! Precision, recall, F-measure, average precision and out-of-sample
//! bootstrap evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, Example, Hyper, Model};
use crate::error::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub pr_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: Metrics,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapStats {
    pub seed: u64,
    pub iterations: Vec<IterationResult>,
    pub mean: Metrics,
    /// Sample standard deviation across iterations (0 for one iteration).
    pub std: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    /// For a bootstrap report, the per-iteration means.
    pub metrics: Metrics,
    /// For a bootstrap report, summed over iterations.
    pub confusion: Confusion,
    /// Metrics whose denominator was zero and which are reported as 0.
    pub undefined: Vec<String>,
    pub bootstrap: Option<BootstrapStats>,
}

/// Average precision: ranks by descending score (ties keep input order) and
/// sums precision at each positive hit, weighted by its recall increment.
pub fn pr_auc(scores: &[f64], labels: &[bool]) -> Result<f64, Error> {
    if scores.len() != labels.len() {
        return Err(Error::Contract("scores and labels differ in length".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::Data("average precision needs at least one positive".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut hits = 0usize;
    let mut ap = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] {
            hits += 1;
            ap += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(ap / positives as f64)
}

/// Threshold metrics plus average precision from raw scores.
pub fn evaluate_scores(scores: &[f64], labels: &[bool], threshold: f64) -> Result<EvalReport, Error> {
    if scores.is_empty() {
        return Err(Error::Data("cannot evaluate on zero records".into()));
    }
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let mut undefined = Vec::new();
    let ratio = |num: usize, den: usize, name: &str, undefined: &mut Vec<String>| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(c.tp, c.tp + c.fp, "precision", &mut undefined);
    let recall = ratio(c.tp, c.tp + c.fn_, "recall", &mut undefined);
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let pr_auc = match pr_auc(scores, labels) {
        Ok(v) => v,
        Err(_) => {
            undefined.push("pr_auc".into());
            0.0
        }
    };
    Ok(EvalReport {
        threshold,
        metrics: Metrics {
            precision,
            recall,
            f_measure,
            pr_auc,
        },
        confusion: c,
        undefined,
        bootstrap: None,
    })
}

pub fn evaluate(model: &Model, examples: &[Example], threshold: f64) -> Result<EvalReport, Error> {
    let scores = examples
        .iter()
        .map(|e| model.predict_proba(&e.x))
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    evaluate_scores(&scores, &labels, threshold)
}

pub const MIN_BOOTSTRAP_RECORDS: usize = 20;
/// Redraws allowed per iteration before giving up.
pub const MAX_REDRAWS: usize = 10;

/// One bootstrap draw: train indices with replacement and the out-of-bag
/// rest. `None` when the draw cannot be trained or scored.
fn draw(rng: &mut ChaCha8Rng, labels: &[bool]) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = labels.len();
    let mut drawn = vec![false; n];
    let train: Vec<usize> = (0..n)
        .map(|_| {
            let i = rng.gen_range(0..n);
            drawn[i] = true;
            i
        })
        .collect();
    let test: Vec<usize> = (0..n).filter(|&i| !drawn[i]).collect();
    let train_pos = train.iter().filter(|&&i| labels[i]).count();
    let valid = train_pos > 0 && train_pos < n && test.iter().any(|&i| labels[i]);
    valid.then_some((train, test))
}

fn summarize(values: impl Iterator<Item = Metrics> + Clone, n: usize) -> (Metrics, Metrics) {
    let pick = |f: fn(&Metrics) -> f64| {
        let xs: Vec<f64> = values.clone().map(|m| f(&m)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        (mean, std)
    };
    let p = pick(|m| m.precision);
    let r = pick(|m| m.recall);
    let f = pick(|m| m.f_measure);
    let a = pick(|m| m.pr_auc);
    (
        Metrics { precision: p.0, recall: r.0, f_measure: f.0, pr_auc: a.0 },
        Metrics { precision: p.1, recall: r.1, f_measure: f.1, pr_auc: a.1 },
    )
}

/// Out-of-sample bootstrap: each iteration trains on `n` records drawn with
/// replacement and tests on the records never drawn.
///
/// Iteration `k` uses its own random stream of `seed`, so results do not
/// depend on scheduling. Draws whose training set is single-class or whose
/// test set has no positive are redrawn.
pub fn bootstrap_eval(
    hyper: &Hyper,
    examples: &[Example],
    iterations: usize,
    seed: u64,
    threshold: f64,
) -> Result<EvalReport, Error> {
    if examples.len() < MIN_BOOTSTRAP_RECORDS {
        return Err(Error::Data(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_RECORDS} records, got {}",
            examples.len()
        )));
    }
    if iterations == 0 {
        return Err(Error::Data("bootstrap needs at least one iteration".into()));
    }
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::Data("both classes must be present".into()));
    }
    let results = (0..iterations)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let (train_idx, test_idx) = (0..MAX_REDRAWS)
                .find_map(|_| draw(&mut rng, &labels))
                .ok_or_else(|| {
                    Error::Data(format!(
                        "iteration {k}: no valid bootstrap draw after {MAX_REDRAWS} attempts"
                    ))
                })?;
            let train_set: Vec<Example> = train_idx.iter().map(|&i| examples[i].clone()).collect();
            let test_set: Vec<Example> = test_idx.iter().map(|&i| examples[i].clone()).collect();
            let model = train(&hyper.with_seed(rng.gen()), &train_set)?;
            let r = evaluate(&model, &test_set, threshold)?;
            Ok(IterationResult {
                train_size: train_set.len(),
                test_size: test_set.len(),
                metrics: r.metrics,
                confusion: r.confusion,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let (mean, std) = summarize(results.iter().map(|r| r.metrics), results.len());
    let confusion = results.iter().fold(Confusion::default(), |a, r| Confusion {
        tp: a.tp + r.confusion.tp,
        fp: a.fp + r.confusion.fp,
        tn: a.tn + r.confusion.tn,
        fn_: a.fn_ + r.confusion.fn_,
    });
    Ok(EvalReport {
        threshold,
        metrics: mean,
        confusion,
        undefined: Vec::new(),
        bootstrap: Some(BootstrapStats {
            seed,
            iterations: results,
            mean,
            std,
        }),
    })
}
