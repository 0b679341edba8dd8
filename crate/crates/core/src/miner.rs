//! Extraction candidates, their ranking score, negative-sample mining,
//! positive-sample ingestion and the dataset file format.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::metrics::{catalog_columns, extract_with_flow, FeatureVector, CATALOG_VERSION, FEATURE_COUNT};
use crate::syntax::{
    count_statements, locate_fragment, methods_of, nesting_depth, parse_fragment,
    parse_method_text, tokenize_code, Block, CodeFragment, MethodDecl, Span, Stmt, StmtKind,
    SyntaxTree, VariableFlow,
};

/// Weights of the candidate ranking score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub length: f64,
    pub depth: f64,
    pub live_in: f64,
    pub live_out: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            length: 1.0,
            depth: 1.0,
            live_in: 0.2,
            live_out: 0.4,
        }
    }
}

impl fmt::Display for ScoreWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.length, self.depth, self.live_in, self.live_out)
    }
}

impl FromStr for ScoreWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Dataset(format!("bad weights `{s}`: {e}")))?;
        match v[..] {
            [length, depth, live_in, live_out] => Ok(Self {
                length,
                depth,
                live_in,
                live_out,
            }),
            _ => Err(Error::Dataset(format!("expected 4 weights, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub fragment: CodeFragment,
    pub method_name: String,
    pub method_span: Span,
    /// Statements in the fragment, nested ones included.
    pub s_f: usize,
    pub s_m: usize,
    pub s_r: usize,
    pub d_m: u32,
    pub d_r: u32,
    pub flow: VariableFlow,
    pub score: f64,
}

impl Candidate {
    /// Measures the fragment against its method without checking eligibility.
    pub fn measure(fragment: CodeFragment, method: &MethodDecl, weights: &ScoreWeights) -> Result<Self, Error> {
        let flow = VariableFlow::analyze(&fragment, method)?;
        let s_m = count_statements(&method.body.stmts);
        let s_f = fragment.statement_count();
        let d_m = nesting_depth(&method.body.stmts);
        let d_r = remainder_depth(&method.body, fragment.span);
        let mut c = Self {
            fragment,
            method_name: method.name.clone(),
            method_span: method.span,
            s_f,
            s_m,
            s_r: s_m - s_f,
            d_m,
            d_r,
            flow,
            score: 0.0,
        };
        c.score = score(&c, weights);
        Ok(c)
    }
}

/// Deepest statement of the method outside `span`.
fn remainder_depth(body: &Block, span: Span) -> u32 {
    let mut d = 0;
    body.walk_blocks(&mut |b| {
        for s in &b.stmts {
            if !span.contains(s.span) {
                d = d.max(s.depth);
            }
        }
    });
    d
}

/// Ranking score; higher means a more natural extraction.
pub fn score(c: &Candidate, w: &ScoreWeights) -> f64 {
    let s_m = c.s_m.max(1) as f64;
    w.length * c.s_f.min(c.s_r) as f64 / s_m
        + w.depth * (c.d_m as f64 - c.d_r as f64) / (c.d_m as f64 + 1.0)
        - w.live_in * c.flow.live_in.len() as f64
        - w.live_out * c.flow.live_out.len() as f64
}

fn contains_return(stmts: &[Stmt]) -> bool {
    let mut found = false;
    for s in stmts {
        s.walk(&mut |st| found |= matches!(st.kind, StmtKind::Return(_)));
    }
    found
}

/// Whether a `break`/`continue` in `stmts` targets a construct outside them.
fn has_escaping_jump(stmts: &[Stmt]) -> bool {
    fn visit(s: &Stmt, in_loop: bool, in_switch: bool, labels: &mut Vec<String>) -> bool {
        let pushed = s.label.clone().map(|l| labels.push(l)).is_some();
        let escapes = match &s.kind {
            StmtKind::Break(None) => !(in_loop || in_switch),
            StmtKind::Continue(None) => !in_loop,
            StmtKind::Break(Some(l)) | StmtKind::Continue(Some(l)) => !labels.contains(l),
            _ => {
                let (lp, sw) = (
                    in_loop || s.is_loop(),
                    in_switch || matches!(s.kind, StmtKind::Switch { .. }),
                );
                s.children().any(|c| visit(c, lp, sw, labels))
            }
        };
        if pushed {
            labels.pop();
        }
        escapes
    }
    stmts.iter().any(|s| visit(s, false, false, &mut Vec::new()))
}

/// The eligibility rules for extraction.
pub fn is_extractable(c: &Candidate) -> bool {
    c.s_f >= 2
        && c.s_f < c.s_m
        && !contains_return(&c.fragment.statements)
        && !has_escaping_jump(&c.fragment.statements)
        && c.flow.live_out.len() <= 1
}

/// All eligible runs of sibling statements in every block of the method,
/// ordered by start offset then length.
pub fn enumerate_candidates(tree: &SyntaxTree, method: &MethodDecl, weights: &ScoreWeights) -> Vec<Candidate> {
    let mut out = Vec::new();
    method.body.walk_blocks(&mut |b| {
        for start in 0..b.stmts.len() {
            for len in 1..=b.stmts.len() - start {
                let fr = CodeFragment::from_run(tree, b, start, len);
                if let Ok(c) = Candidate::measure(fr, method, weights) {
                    if is_extractable(&c) {
                        out.push(c);
                    }
                }
            }
        }
    });
    out.sort_by_key(|c| (c.fragment.span.start, c.fragment.location.map(|l| l.len)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    MinedPositive,
    SampledNegative,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::MinedPositive => "mined-positive",
            Origin::SampledNegative => "sampled-negative",
        })
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "mined-positive" => Ok(Origin::MinedPositive),
            "sampled-negative" => Ok(Origin::SampledNegative),
            _ => Err(Error::Dataset(format!("unknown origin `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub path: String,
    pub method: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub features: FeatureVector,
    pub label: bool,
    pub origin: Origin,
    /// Absent for records read back from a dataset file.
    pub provenance: Option<Provenance>,
}

/// Number of top-ranked candidates withheld from negative sampling.
pub fn excluded_top(n: usize) -> usize {
    (n * 5).div_ceil(100)
}

pub const PER_METHOD_CAP: usize = 3;

/// Every eligible candidate of the corpus, ranked by descending score with
/// ties broken by path, start offset and length.
pub fn rank_corpus(corpus: &[SyntaxTree], weights: &ScoreWeights) -> Vec<Candidate> {
    let mut all: Vec<Candidate> = corpus
        .par_iter()
        .flat_map_iter(|t| {
            methods_of(t)
                .into_iter()
                .flat_map(|m| enumerate_candidates(t, m, weights))
                .collect::<Vec<_>>()
        })
        .collect();
    all.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.fragment.path.cmp(&b.fragment.path))
            .then(a.fragment.span.start.cmp(&b.fragment.span.start))
            .then(a.fragment.span.end.cmp(&b.fragment.span.end))
    });
    all
}

/// Samples `n` negatives from the bottom 95% of the corpus-wide ranking.
pub fn mine_negatives(
    corpus: &[SyntaxTree],
    n: usize,
    seed: u64,
    weights: &ScoreWeights,
) -> Result<Vec<DatasetRecord>, Error> {
    if n == 0 {
        return Err(Error::Contract("n must be at least 1".into()));
    }
    let ranked = rank_corpus(corpus, weights);
    let pool = &ranked[excluded_top(ranked.len())..];
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut per_method: HashMap<(&str, usize), usize> = HashMap::new();
    let mut picked = Vec::with_capacity(n);
    for i in order {
        let c = &pool[i];
        let used = per_method
            .entry((c.fragment.path.as_str(), c.method_span.start))
            .or_insert(0);
        if *used < PER_METHOD_CAP {
            *used += 1;
            picked.push(c);
            if picked.len() == n {
                break;
            }
        }
    }
    if picked.len() < n {
        return Err(Error::InsufficientCandidates {
            needed: n,
            available: picked.len(),
        });
    }
    let trees: HashMap<&str, &SyntaxTree> = corpus.iter().map(|t| (t.path.as_str(), t)).collect();
    picked
        .into_iter()
        .map(|c| {
            let tree = trees[c.fragment.path.as_str()];
            let method = methods_of(tree)
                .into_iter()
                .find(|m| m.span == c.method_span)
                .expect("candidate method");
            Ok(DatasetRecord {
                features: extract_with_flow(&c.fragment, method, &c.flow)?,
                label: false,
                origin: Origin::SampledNegative,
                provenance: Some(Provenance {
                    path: c.fragment.path.clone(),
                    method: c.method_name.clone(),
                    span: c.fragment.span,
                }),
            })
        })
        .collect()
}

pub const POSITIVES_FORMAT: &str = "pastewatch-positives";
pub const POSITIVES_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
struct PositiveRow {
    fragment: String,
    method: String,
    path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRow {
    /// 1-based line number in the positives file.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct PositivesReport {
    pub records: Vec<DatasetRecord>,
    pub skipped: Vec<SkippedRow>,
}

/// The header line that starts every positives file.
pub fn positives_header() -> String {
    format!("{{\"format\":\"{POSITIVES_FORMAT}\",\"version\":{POSITIVES_VERSION}}}")
}

/// Finds the fragment's code tokens as a contiguous run of the method's
/// body tokens and returns the covered span.
fn find_in_method(fragment: &str, method: &MethodDecl) -> Option<Span> {
    let want: Vec<String> = tokenize_code(fragment).ok()?.into_iter().map(|t| t.text).collect();
    if want.is_empty() {
        return None;
    }
    let body = &method.body_tokens;
    (0..body.len().checked_sub(want.len())? + 1)
        .find(|&i| body[i..i + want.len()].iter().zip(&want).all(|(a, b)| a.text == *b))
        .map(|i| Span::new(body[i].span.start, body[i + want.len() - 1].span.end))
}

fn positive_record(row: &PositiveRow) -> Result<DatasetRecord, String> {
    parse_fragment(&row.fragment).map_err(|e| format!("fragment rejected: {e}"))?;
    let tree = parse_method_text(&row.method).map_err(|e| format!("method does not parse: {e}"))?;
    let method = methods_of(&tree)[0];
    let span = find_in_method(&row.fragment, method).ok_or("fragment not found in method")?;
    let (m, fr) = locate_fragment(&tree, span).ok_or("fragment is not a statement run")?;
    let flow = VariableFlow::analyze(&fr, m).map_err(|e| e.to_string())?;
    let features = extract_with_flow(&fr, m, &flow).map_err(|e| e.to_string())?;
    Ok(DatasetRecord {
        features,
        label: true,
        origin: Origin::MinedPositive,
        provenance: Some(Provenance {
            path: row.path.clone(),
            method: m.name.clone(),
            span: fr.span,
        }),
    })
}

pub fn ingest_positives_from(reader: impl BufRead) -> Result<PositivesReport, Error> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::Dataset(e.to_string()))?
        .ok_or_else(|| Error::Dataset("positives file is empty; header missing".into()))?;
    let parsed: serde_json::Value = serde_json::from_str(header.trim())
        .map_err(|e| Error::Dataset(format!("malformed positives header: {e}")))?;
    if parsed["format"] != POSITIVES_FORMAT || parsed["version"] != POSITIVES_VERSION {
        return Err(Error::Dataset(format!("unsupported positives header `{}`", header.trim())));
    }
    let mut report = PositivesReport::default();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Dataset(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = serde_json::from_str::<PositiveRow>(&line)
            .map_err(|e| format!("bad row: {e}"))
            .and_then(|row| positive_record(&row));
        match outcome {
            Ok(r) => report.records.push(r),
            Err(reason) => report.skipped.push(SkippedRow { line: i + 2, reason }),
        }
    }
    Ok(report)
}

pub fn ingest_positives(path: &Path) -> Result<PositivesReport, Error> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_positives_from(std::io::BufReader::new(f))
}

/// Truncates the larger class so both classes have the same size.
pub fn balance(positives: Vec<DatasetRecord>, negatives: Vec<DatasetRecord>) -> Vec<DatasetRecord> {
    let n = positives.len().min(negatives.len());
    positives
        .into_iter()
        .take(n)
        .chain(negatives.into_iter().take(n))
        .collect()
}

const DATASET_MAGIC: &str = "#pastewatch-dataset";

#[derive(Debug, Clone)]
pub struct Dataset {
    pub catalog_version: u32,
    pub weights: ScoreWeights,
    /// Sampling seed, when the file was produced by mining.
    pub seed: Option<u64>,
    pub records: Vec<DatasetRecord>,
}

pub fn dataset_header(weights: &ScoreWeights, seed: Option<u64>) -> String {
    let seed = seed.map(|s| format!(";seed={s}")).unwrap_or_default();
    format!(
        "{DATASET_MAGIC};catalog={CATALOG_VERSION};weights={weights}{seed};columns={},label,origin",
        catalog_columns()
    )
}

pub fn write_dataset(
    mut w: impl Write,
    weights: &ScoreWeights,
    seed: Option<u64>,
    records: &[DatasetRecord],
) -> std::io::Result<()> {
    writeln!(w, "{}", dataset_header(weights, seed))?;
    for r in records {
        let mut line = String::new();
        for x in r.features.as_slice() {
            line.push_str(&x.to_string());
            line.push(',');
        }
        line.push_str(if r.label { "1" } else { "0" });
        line.push(',');
        line.push_str(&r.origin.to_string());
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_dataset(reader: impl BufRead) -> Result<Dataset, Error> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::Dataset(e.to_string()))?
        .ok_or_else(|| Error::Dataset("dataset is empty".into()))?;
    let mut fields = header.trim_end().split(';');
    if fields.next() != Some(DATASET_MAGIC) {
        return Err(Error::Dataset("missing dataset header".into()));
    }
    let mut catalog_version = None;
    let mut weights = None;
    let mut columns = None;
    let mut seed = None;
    for f in fields {
        match f.split_once('=') {
            Some(("catalog", v)) => {
                catalog_version = Some(v.parse::<u32>().map_err(|e| Error::Dataset(format!("catalog version: {e}")))?)
            }
            Some(("weights", v)) => weights = Some(v.parse::<ScoreWeights>()?),
            Some(("seed", v)) => seed = Some(v.parse::<u64>().map_err(|e| Error::Dataset(format!("seed: {e}")))?),
            Some(("columns", v)) => columns = Some(v.to_string()),
            _ => return Err(Error::Dataset(format!("unknown header field `{f}`"))),
        }
    }
    let catalog_version = catalog_version.ok_or_else(|| Error::Dataset("header lacks catalog".into()))?;
    if catalog_version != CATALOG_VERSION {
        return Err(Error::CatalogVersion {
            expected: CATALOG_VERSION,
            found: catalog_version,
        });
    }
    if columns.as_deref() != Some(format!("{},label,origin", catalog_columns()).as_str()) {
        return Err(Error::Dataset("dataset columns differ from the metric catalog".into()));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Dataset(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Dataset(format!("line {}: {what}", i + 2));
        let parts: Vec<&str> = line.trim_end().split(',').collect();
        if parts.len() != FEATURE_COUNT + 2 {
            return Err(bad(&format!("expected {} fields, got {}", FEATURE_COUNT + 2, parts.len())));
        }
        let values = parts[..FEATURE_COUNT]
            .iter()
            .map(|p| p.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        let features = FeatureVector::try_from(values).map_err(|e| bad(&e.to_string()))?;
        let label = match parts[FEATURE_COUNT] {
            "1" => true,
            "0" => false,
            other => return Err(bad(&format!("label `{other}`"))),
        };
        let origin: Origin = parts[FEATURE_COUNT + 1].parse().map_err(|e: Error| bad(&e.to_string()))?;
        if label != (origin == Origin::MinedPositive) {
            return Err(bad("label disagrees with origin"));
        }
        records.push(DatasetRecord {
            features,
            label,
            origin,
            provenance: None,
        });
    }
    Ok(Dataset {
        catalog_version,
        weights: weights.unwrap_or_default(),
        seed,
        records,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset, Error> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(f))
}
