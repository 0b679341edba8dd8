//! Token-abstraction clone detection between a fragment and the methods of
//! its file.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::syntax::{methods_of, CodeFragment, MethodDecl, Span, SyntaxTree, Token, TokenKind};

pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.8;
pub const MIN_STATEMENTS: usize = 2;
pub const MIN_NORMALIZED_TOKENS: usize = 4;

/// Abstracted token sequence: identifiers become `ID`, literals their kind
/// marker, everything else keeps its text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NormTokenSeq(pub Vec<String>);

impl NormTokenSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for NormTokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

fn abstract_token(t: &Token) -> Option<&str> {
    Some(match t.kind {
        TokenKind::Comment => return None,
        TokenKind::Identifier => "ID",
        TokenKind::IntLiteral => "LIT_INT",
        TokenKind::FloatLiteral => "LIT_FLOAT",
        TokenKind::StringLiteral => "LIT_STR",
        TokenKind::CharLiteral => "LIT_CHAR",
        TokenKind::BoolLiteral => "LIT_BOOL",
        TokenKind::Keyword | TokenKind::Operator | TokenKind::Separator => &t.text,
    })
}

pub fn normalize(tokens: &[Token]) -> NormTokenSeq {
    NormTokenSeq(
        tokens
            .iter()
            .filter_map(abstract_token)
            .map(str::to_string)
            .collect(),
    )
}

/// Multiset of abstract tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenBag {
    counts: BTreeMap<String, usize>,
    size: usize,
}

impl TokenBag {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn count(&self, token: &str) -> usize {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenBag {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut bag = TokenBag::default();
        for t in iter {
            *bag.counts.entry(t.as_ref().to_string()).or_insert(0) += 1;
            bag.size += 1;
        }
        bag
    }
}

pub fn token_bag(seq: &NormTokenSeq) -> TokenBag {
    seq.0.iter().collect()
}

/// Multiset overlap divided by the larger bag size; 0 when both are empty.
pub fn similarity(a: &TokenBag, b: &TokenBag) -> f64 {
    let denom = a.size.max(b.size);
    if denom == 0 {
        return 0.0;
    }
    let (small, large) = if a.counts.len() <= b.counts.len() { (a, b) } else { (b, a) };
    let shared: usize = small
        .counts
        .iter()
        .map(|(t, &n)| n.min(large.count(t)))
        .sum();
    shared as f64 / denom as f64
}

/// Whether `fragment` occurs contiguously in `method` (Knuth-Morris-Pratt).
pub fn is_substring_match(fragment: &NormTokenSeq, method: &NormTokenSeq) -> Result<bool, Error> {
    let p = &fragment.0;
    if p.is_empty() {
        return Err(Error::Contract("empty fragment sequence".into()));
    }
    let mut fail = vec![0usize; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = fail[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let mut k = 0;
    for t in &method.0 {
        while k > 0 && *t != p[k] {
            k = fail[k - 1];
        }
        if *t == p[k] {
            k += 1;
            if k == p.len() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicateMatch {
    pub method: String,
    pub span: Span,
    pub similarity: f64,
    pub exact: bool,
}

/// Whether a fragment is large enough to be searched for duplicates.
pub fn meets_minimum_size(fragment: &CodeFragment) -> bool {
    fragment.statement_count() >= MIN_STATEMENTS
        && normalize(&fragment.tokens).len() >= MIN_NORMALIZED_TOKENS
}

/// Body tokens of `method`, minus the fragment's own tokens when the
/// fragment is located inside it.
fn comparable_tokens(method: &MethodDecl, fragment: &CodeFragment) -> NormTokenSeq {
    let own = fragment.location.is_some() && method.body.span.contains(fragment.span);
    let kept = method
        .body_tokens
        .iter()
        .filter(|t| !(own && fragment.span.contains(t.span)));
    NormTokenSeq(kept.filter_map(abstract_token).map(str::to_string).collect())
}

/// Methods of `file` that contain the fragment exactly (after abstraction)
/// or whose token bag is at least `threshold` similar to it. The fragment's
/// own occurrence is removed from the method holding it before comparison.
pub fn find_duplicates(
    fragment: &CodeFragment,
    file: &SyntaxTree,
    threshold: f64,
) -> Result<Vec<DuplicateMatch>, Error> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Contract(format!("threshold {threshold} outside (0, 1]")));
    }
    if !meets_minimum_size(fragment) {
        return Ok(Vec::new());
    }
    let seq = normalize(&fragment.tokens);
    let bag = token_bag(&seq);
    let mut out = Vec::new();
    for m in methods_of(file) {
        let body = comparable_tokens(m, fragment);
        let exact = is_substring_match(&seq, &body)?;
        let sim = similarity(&bag, &token_bag(&body));
        if exact || sim >= threshold {
            out.push(DuplicateMatch {
                method: m.name.clone(),
                span: m.span,
                similarity: sim,
                exact,
            });
        }
    }
    out.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then(a.span.start.cmp(&b.span.start))
    });
    Ok(out)
}

/// Parses `source` and runs [`find_duplicates`] against it.
pub fn find_duplicates_in_source(
    fragment: &CodeFragment,
    source: &str,
    threshold: f64,
) -> Result<Vec<DuplicateMatch>, Error> {
    let tree = crate::syntax::parse_compilation_unit(source)?;
    find_duplicates(fragment, &tree, threshold)
}
