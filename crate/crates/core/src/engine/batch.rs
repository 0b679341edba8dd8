//! Whole-corpus modes behind the command-line subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;
use walkdir::WalkDir;

use crate::clone::find_duplicates;
use crate::error::Error;
use crate::learn::{bootstrap_eval, evaluate, examples_of, train, EvalReport, Hyper, Model, ModelKind};
use crate::metrics::extract_with_flow;
use crate::miner::{balance, ingest_positives, mine_negatives, Dataset, DatasetRecord, ScoreWeights, SkippedRow};
use crate::miner::enumerate_candidates;
use crate::syntax::{methods_of, parse_file, Span, SyntaxTree};

/// `.java` files below `root`, sorted by path.
pub fn java_files(root: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
            Error::io(path, e.into())
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "java") {
            out.push(entry.into_path());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unparsed {
    pub path: String,
    pub error: String,
}

/// Parses every Java file under `root`; failures are listed, not fatal.
pub fn load_corpus(root: &Path) -> Result<(Vec<SyntaxTree>, Vec<Unparsed>), Error> {
    let mut trees = Vec::new();
    let mut failed = Vec::new();
    for p in java_files(root)? {
        let shown = p.strip_prefix(root).unwrap_or(&p).display().to_string();
        let parsed = std::fs::read_to_string(&p)
            .map_err(|e| e.to_string())
            .and_then(|src| parse_file(&src, &shown).map_err(|e| e.to_string()));
        match parsed {
            Ok(t) => trees.push(t),
            Err(error) => failed.push(Unparsed { path: shown, error }),
        }
    }
    Ok((trees, failed))
}

#[derive(Debug, Clone, Serialize)]
pub struct Opportunity {
    pub method: String,
    pub span: Span,
    pub lines: (usize, usize),
    pub probability: f64,
    pub score: f64,
    pub duplicates: usize,
    pub recommended: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileReport {
    pub path: String,
    pub opportunities: Vec<Opportunity>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub decision_threshold: f64,
    pub similarity_threshold: f64,
    pub files: Vec<FileReport>,
    pub unparsed: Vec<Unparsed>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset].matches('\n').count() + 1
}

/// Classifies every eligible candidate of every method. Opportunities are
/// ranked by probability, then score, then position.
pub fn analyze(
    root: &Path,
    model: &Model,
    decision_threshold: f64,
    similarity_threshold: f64,
) -> Result<AnalysisReport, Error> {
    let (trees, unparsed) = load_corpus(root)?;
    let w = ScoreWeights::default();
    let mut files = Vec::new();
    for t in &trees {
        let mut ops = Vec::new();
        for m in methods_of(t) {
            for c in enumerate_candidates(t, m, &w) {
                let features = extract_with_flow(&c.fragment, m, &c.flow)?;
                let probability = model.predict_proba(features.as_slice())?;
                let duplicates = find_duplicates(&c.fragment, t, similarity_threshold)?.len();
                let span = c.fragment.span;
                ops.push(Opportunity {
                    method: m.name.clone(),
                    span,
                    lines: (line_of(&t.source, span.start), line_of(&t.source, span.end)),
                    probability,
                    score: c.score,
                    duplicates,
                    recommended: probability >= decision_threshold && duplicates > 0,
                });
            }
        }
        ops.sort_by(|a, b| {
            b.probability
                .total_cmp(&a.probability)
                .then(b.score.total_cmp(&a.score))
                .then(a.span.cmp(&b.span))
        });
        files.push(FileReport {
            path: t.path.clone(),
            opportunities: ops,
        });
    }
    Ok(AnalysisReport {
        decision_threshold,
        similarity_threshold,
        files,
        unparsed,
    })
}

impl AnalysisReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let total: usize = self.files.iter().map(|f| f.opportunities.len()).sum();
        let rec: usize = self
            .files
            .iter()
            .map(|f| f.opportunities.iter().filter(|o| o.recommended).count())
            .sum();
        s.push_str(&format!(
            "{} files, {total} candidates, {rec} recommended, {} unparsed\n",
            self.files.len(),
            self.unparsed.len()
        ));
        for f in &self.files {
            for o in f.opportunities.iter().filter(|o| o.recommended) {
                s.push_str(&format!(
                    "{}:{}-{} {} p={:.3} duplicates={}\n",
                    f.path, o.lines.0, o.lines.1, o.method, o.probability, o.duplicates
                ));
            }
        }
        for u in &self.unparsed {
            s.push_str(&format!("unparsed {}: {}\n", u.path, u.error));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MineReport {
    pub seed: u64,
    pub positives: usize,
    pub negatives: usize,
    pub skipped_positives: Vec<(usize, String)>,
    pub unparsed: Vec<Unparsed>,
}

/// Mines `n` negatives (default: as many as there are positives) and
/// returns the balanced dataset.
pub fn mine(
    root: &Path,
    positives: &Path,
    n: Option<usize>,
    seed: u64,
    weights: &ScoreWeights,
) -> Result<(Dataset, MineReport), Error> {
    let (trees, unparsed) = load_corpus(root)?;
    let pos = ingest_positives(positives)?;
    let n = n.unwrap_or(pos.records.len());
    let negatives = mine_negatives(&trees, n, seed, weights)?;
    let records: Vec<DatasetRecord> = balance(pos.records, negatives);
    let report = MineReport {
        seed,
        positives: records.iter().filter(|r| r.label).count(),
        negatives: records.iter().filter(|r| !r.label).count(),
        skipped_positives: pos.skipped.into_iter().map(|SkippedRow { line, reason }| (line, reason)).collect(),
        unparsed,
    };
    Ok((
        Dataset {
            catalog_version: crate::metrics::CATALOG_VERSION,
            weights: weights.clone(),
            seed: Some(seed),
            records,
        },
        report,
    ))
}

/// Trains on the dataset and reports the fit on the training records.
pub fn train_on(dataset: &Dataset, kind: ModelKind, seed: u64, threshold: f64) -> Result<(Model, EvalReport), Error> {
    let examples = examples_of(&dataset.records);
    let model = train(&Hyper::default_for(kind, seed), &examples)?;
    let report = evaluate(&model, &examples, threshold)?;
    Ok((model, report))
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalOutput {
    pub kind: ModelKind,
    pub hyper: Hyper,
    pub records: usize,
    pub seed: Option<u64>,
    pub bootstrap_iterations: Option<usize>,
    pub report: EvalReport,
}

/// Evaluates the model on the dataset, or with `bootstrap` iterations
/// retrains the model's configuration out of sample.
pub fn eval_on(
    dataset: &Dataset,
    model: &Model,
    bootstrap: Option<usize>,
    seed: u64,
    threshold: f64,
) -> Result<EvalOutput, Error> {
    let examples = examples_of(&dataset.records);
    let report = match bootstrap {
        Some(k) => bootstrap_eval(&model.hyper, &examples, k, seed, threshold)?,
        None => evaluate(model, &examples, threshold)?,
    };
    Ok(EvalOutput {
        kind: model.kind(),
        hyper: model.hyper.clone(),
        records: examples.len(),
        seed: bootstrap.map(|_| seed),
        bootstrap_iterations: bootstrap,
        report,
    })
}

/// Canonical JSON (sorted keys) of any report.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    serde_json::to_string_pretty(&v).expect("value serializes")
}
