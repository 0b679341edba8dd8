//! The 78-slot fragment feature vector and its catalog.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::syntax::liveness::{local_variable_count, VariableFlow};
use crate::syntax::{nesting_depth, CodeFragment, MethodDecl, Token, TokenKind};

pub const FEATURE_COUNT: usize = 78;
pub const CATALOG_VERSION: u32 = 1;

/// Keywords whose counts form slots 0..62, in slot order.
pub const KEYWORDS: [&str; 31] = [
    "continue", "for", "new", "switch", "assert", "synchronized", "boolean", "do", "if", "this",
    "break", "double", "throw", "byte", "else", "case", "instanceof", "return", "transient",
    "catch", "int", "short", "try", "char", "final", "finally", "long", "strictfp", "float",
    "super", "while",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricGroup {
    Keyword,
    Size,
    Method,
    Coupling,
}

impl fmt::Display for MetricGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricGroup::Keyword => "keyword",
            MetricGroup::Size => "size",
            MetricGroup::Method => "method",
            MetricGroup::Coupling => "coupling",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricInfo {
    pub index: usize,
    pub name: String,
    pub group: MetricGroup,
    pub description: String,
}

/// The ordered metric catalog.
pub fn catalog() -> &'static [MetricInfo] {
    static CATALOG: OnceLock<Vec<MetricInfo>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut v = Vec::with_capacity(FEATURE_COUNT);
        let mut push = |name: String, group, description: String| {
            v.push(MetricInfo {
                index: v.len(),
                name,
                group,
                description,
            })
        };
        for k in KEYWORDS {
            push(
                format!("kw_{k}"),
                MetricGroup::Keyword,
                format!("occurrences of keyword `{k}` in the fragment"),
            );
            push(
                format!("kw_{k}_per_line"),
                MetricGroup::Keyword,
                format!("occurrences of keyword `{k}` per fragment line"),
            );
        }
        let rest: [(&str, MetricGroup, &str); 16] = [
            ("frag_lines", MetricGroup::Size, "fragment lines holding code"),
            ("frag_tokens", MetricGroup::Size, "fragment tokens, comments excluded"),
            ("frag_tokens_per_line", MetricGroup::Size, "fragment tokens per line"),
            ("frag_chars", MetricGroup::Size, "non-whitespace characters of fragment tokens"),
            ("frag_chars_per_line", MetricGroup::Size, "fragment characters per line"),
            ("frag_depth", MetricGroup::Size, "maximum statement nesting depth within the fragment"),
            ("method_lines", MetricGroup::Method, "lines holding code in the enclosing method body"),
            ("frag_method_line_ratio", MetricGroup::Method, "fragment lines over method body lines"),
            ("method_tokens", MetricGroup::Method, "tokens in the enclosing method body"),
            ("method_depth", MetricGroup::Method, "maximum statement nesting depth of the method body"),
            ("method_params", MetricGroup::Method, "parameters of the enclosing method"),
            ("method_locals", MetricGroup::Method, "local variables declared in the method, loop variables included"),
            ("ext_refs", MetricGroup::Coupling, "fragment references to variables declared outside it"),
            ("ext_refs_per_line", MetricGroup::Coupling, "external references per fragment line"),
            ("live_in", MetricGroup::Coupling, "variables live into the fragment"),
            ("live_out", MetricGroup::Coupling, "fragment variables live after it"),
        ];
        for (name, group, desc) in rest {
            push(name.to_string(), group, desc.to_string());
        }
        v
    })
}

/// Comma-separated metric names, as written in dataset headers.
pub fn catalog_columns() -> String {
    catalog()
        .iter()
        .map(|m| m.name.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Fixed-length feature vector in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn zeros() -> Self {
        Self(vec![0.0; FEATURE_COUNT])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, slot: usize) -> f64 {
        self.0[slot]
    }

    pub fn set(&mut self, slot: usize, value: f64) {
        self.0[slot] = value;
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self, Error> {
        if v.len() != FEATURE_COUNT {
            return Err(Error::Data(format!(
                "feature vector has {} slots, expected {FEATURE_COUNT}",
                v.len()
            )));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Data(format!("feature value {bad} is not finite and non-negative")));
        }
        Ok(Self(v))
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

fn line_count(tokens: &[Token]) -> usize {
    tokens.iter().map(|t| t.line).collect::<BTreeSet<_>>().len()
}

fn char_count(tokens: &[Token]) -> usize {
    tokens
        .iter()
        .flat_map(|t| t.text.chars())
        .filter(|c| !c.is_whitespace())
        .count()
}

fn lines_of(fragment: &CodeFragment) -> f64 {
    fragment.line_count().max(1) as f64
}

pub fn keyword_features(fragment: &CodeFragment) -> [f64; 62] {
    let lines = lines_of(fragment);
    let mut out = [0.0; 62];
    for t in fragment.tokens.iter().filter(|t| t.kind == TokenKind::Keyword) {
        if let Some(k) = KEYWORDS.iter().position(|k| *k == t.text) {
            out[2 * k] += 1.0;
        }
    }
    for k in 0..KEYWORDS.len() {
        out[2 * k + 1] = out[2 * k] / lines;
    }
    out
}

pub fn size_features(fragment: &CodeFragment) -> [f64; 6] {
    let lines = lines_of(fragment);
    let tokens = fragment.tokens.len() as f64;
    let chars = char_count(&fragment.tokens) as f64;
    [
        lines,
        tokens,
        tokens / lines,
        chars,
        chars / lines,
        nesting_depth(&fragment.statements) as f64,
    ]
}

fn require_within(fragment: &CodeFragment, method: &MethodDecl) -> Result<(), Error> {
    if fragment.is_within(method) {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "fragment at {}..{} is not within method `{}`",
            fragment.span.start, fragment.span.end, method.name
        )))
    }
}

pub fn method_context_features(fragment: &CodeFragment, method: &MethodDecl) -> Result<[f64; 6], Error> {
    require_within(fragment, method)?;
    let method_lines = line_count(&method.body_tokens).max(1) as f64;
    Ok([
        method_lines,
        lines_of(fragment) / method_lines,
        method.body_tokens.len() as f64,
        nesting_depth(&method.body.stmts) as f64,
        method.params.len() as f64,
        local_variable_count(method) as f64,
    ])
}

pub fn coupling_features(fragment: &CodeFragment, method: &MethodDecl) -> Result<[f64; 4], Error> {
    let flow = VariableFlow::analyze(fragment, method)?;
    Ok(coupling_from_flow(fragment, &flow))
}

fn coupling_from_flow(fragment: &CodeFragment, flow: &VariableFlow) -> [f64; 4] {
    let refs = flow.external_refs as f64;
    [
        refs,
        refs / lines_of(fragment),
        flow.live_in.len() as f64,
        flow.live_out.len() as f64,
    ]
}

/// All 78 features in catalog order.
pub fn extract_features(fragment: &CodeFragment, method: &MethodDecl) -> Result<FeatureVector, Error> {
    let flow = VariableFlow::analyze(fragment, method)?;
    extract_with_flow(fragment, method, &flow)
}

/// Like [`extract_features`], reusing an already computed variable flow.
pub fn extract_with_flow(
    fragment: &CodeFragment,
    method: &MethodDecl,
    flow: &VariableFlow,
) -> Result<FeatureVector, Error> {
    let mut v = Vec::with_capacity(FEATURE_COUNT);
    v.extend(keyword_features(fragment));
    v.extend(size_features(fragment));
    v.extend(method_context_features(fragment, method)?);
    v.extend(coupling_from_flow(fragment, flow));
    FeatureVector::try_from(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{locate_fragment, parse_compilation_unit, parse_fragment, Span, SyntaxTree};

    fn raw(text: &str) -> CodeFragment {
        CodeFragment::from_parsed(parse_fragment(text).unwrap(), "")
    }

    fn kw(v: &[f64], k: &str) -> (f64, f64) {
        let i = KEYWORDS.iter().position(|x| *x == k).unwrap();
        (v[2 * i], v[2 * i + 1])
    }

    fn located<'a>(t: &'a SyntaxTree, text: &str) -> (&'a MethodDecl, CodeFragment) {
        let at = t.source.find(text).unwrap();
        locate_fragment(t, Span::new(at, at + text.len())).unwrap()
    }

    #[test]
    fn catalog_shape() {
        let c = catalog();
        assert_eq!(c.len(), FEATURE_COUNT);
        assert!(c.iter().enumerate().all(|(i, m)| m.index == i));
        let names: BTreeSet<_> = c.iter().map(|m| &m.name).collect();
        assert_eq!(names.len(), FEATURE_COUNT);
        assert_eq!(c[62].name, "frag_lines");
        assert_eq!(c[69].name, "frag_method_line_ratio");
        assert_eq!(c[77].name, "live_out");
        assert!(KEYWORDS.iter().all(|k| crate::syntax::lexer::is_reserved(k)));
    }

    #[test]
    fn keyword_examples() {
        assert!(keyword_features(&raw("x = 1;")).iter().all(|x| *x == 0.0));
        let v = keyword_features(&raw("if (x) { return; } else { return; }"));
        assert_eq!(kw(&v, "if"), (1.0, 1.0));
        assert_eq!(kw(&v, "else"), (1.0, 1.0));
        assert_eq!(kw(&v, "return"), (2.0, 2.0));
        assert_eq!(v.iter().sum::<f64>(), 8.0);
        let v = keyword_features(&raw("for (;;) {\n break; }"));
        assert_eq!(kw(&v, "for"), (1.0, 0.5));
        assert_eq!(kw(&v, "break"), (1.0, 0.5));
        assert_eq!(v.iter().sum::<f64>(), 3.0);
        // Keywords inside strings and comments do not count.
        let v = keyword_features(&raw("s = \"if while\"; // for\n"));
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn size_examples() {
        assert_eq!(size_features(&raw("a();")), [1.0, 4.0, 4.0, 4.0, 4.0, 0.0]);
        let v = size_features(&raw("a();\nb = c;"));
        assert_eq!((v[0], v[5]), (2.0, 0.0));
        assert_eq!(size_features(&raw("while (c) { if (d) { a(); } }"))[5], 2.0);
        // String literal spaces are whitespace too.
        assert_eq!(size_features(&raw("s = \"a b\";"))[3], 7.0);
    }

    #[test]
    fn method_examples() {
        let src = "class A {\n int f(int a, int b, int c) {\n  int x = a;\n  int y = b;\n  for (int i = 0; i < c; i++) {\n   x += i;\n  }\n  for (int v : new int[] {1}) { y += v; }\n  g(x);\n  return x + y;\n }\n}";
        let t = parse_compilation_unit(src).unwrap();
        let (m, fr) = located(&t, "int x = a;\n  int y = b;");
        let v = method_context_features(&fr, m).unwrap();
        assert_eq!(v[0], 8.0);
        assert_eq!(v[1], 0.25);
        assert_eq!(v[3], 1.0);
        assert_eq!(v[4], 3.0);
        assert_eq!(v[5], 4.0);
        let body = &src[m.body.span.start + 1..m.body.span.end - 1];
        let (_, whole) = located(&t, body.trim());
        assert_eq!(method_context_features(&whole, m).unwrap()[1], 1.0);
    }

    #[test]
    fn ten_line_method_ratio() {
        let body: String = (0..10).map(|i| format!("  s{i}();\n")).collect();
        let src = format!("class A {{\n void f() {{\n{body} }}\n}}");
        let t = parse_compilation_unit(&src).unwrap();
        let (m, fr) = located(&t, "s3();\n  s4();");
        assert_eq!(method_context_features(&fr, m).unwrap()[1], 0.2);
    }

    #[test]
    fn coupling_examples() {
        let t = parse_compilation_unit("class A { void f(int x) { int y = 0; y = x + x; g(); } }").unwrap();
        let (m, fr) = located(&t, "y = x + x;");
        assert_eq!(coupling_features(&fr, m).unwrap(), [3.0, 3.0, 1.0, 0.0]);
        let t = parse_compilation_unit("class A { void f() { int a = 1; int b = a; h(); } }").unwrap();
        let (m, fr) = located(&t, "int a = 1; int b = a;");
        assert_eq!(coupling_features(&fr, m).unwrap(), [0.0, 0.0, 0.0, 0.0]);
        let t = parse_compilation_unit("class A { int f() { int s = 0; s++; return s; } }").unwrap();
        let (m, fr) = located(&t, "int s = 0; s++;");
        assert_eq!(coupling_features(&fr, m).unwrap()[3], 1.0);
    }

    #[test]
    fn outside_fragment_is_rejected() {
        let t = parse_compilation_unit("class A { void f() { a(); b(); } void g() { c(); } }").unwrap();
        let (_, fr) = located(&t, "a(); b();");
        let g = crate::syntax::methods_of(&t)[1];
        assert!(matches!(extract_features(&fr, g), Err(Error::Contract(_))));
        assert!(matches!(coupling_features(&raw("a();"), g), Err(Error::Contract(_))));
    }

    #[test]
    fn vector_rejects_bad_shapes() {
        assert!(FeatureVector::try_from(vec![0.0; 77]).is_err());
        let mut v = vec![0.0; 78];
        v[3] = f64::NAN;
        assert!(FeatureVector::try_from(v).is_err());
        let json = serde_json::to_string(&FeatureVector::zeros()).unwrap();
        let back: FeatureVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, FeatureVector::zeros());
    }
}
