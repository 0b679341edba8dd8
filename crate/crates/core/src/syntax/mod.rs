//! Lexing, parsing and variable-flow queries over a practical Java subset.

pub mod ast;
mod fragment;
pub mod lexer;
pub mod liveness;
mod parser;

use serde::{Deserialize, Serialize};

pub use ast::*;
pub use fragment::{
    locate_fragment, parse_fragment, CodeFragment, FragmentLocation, FragmentRejection,
    ParsedFragment, RejectReason,
};
pub use lexer::{tokenize, tokenize_code, Token, TokenKind};
pub use liveness::{live_in, live_out, VariableFlow};

use crate::error::{Error, ParseError};

/// Half-open byte range into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Parses a whole compilation unit. Method bodies are parsed leniently.
pub fn parse_compilation_unit(source: &str) -> Result<SyntaxTree, Error> {
    parse_file(source, "")
}

/// Like [`parse_compilation_unit`], recording `path` on the tree.
pub fn parse_file(source: &str, path: &str) -> Result<SyntaxTree, Error> {
    let tokens = tokenize_code(source)?;
    let types = parser::Parser::new(source, &tokens, true).compilation_unit()?;
    Ok(SyntaxTree {
        path: path.to_string(),
        source: source.to_string(),
        tokens,
        types,
    })
}

/// Parses a lone method declaration by wrapping it in a synthetic class.
/// Offsets in the returned tree refer to the wrapped source.
pub fn parse_method_text(source: &str) -> Result<SyntaxTree, Error> {
    let wrapped = format!("class __Wrapper {{\n{source}\n}}");
    let tree = parse_compilation_unit(&wrapped).map_err(|e| match e {
        Error::Parse(p) => Error::Parse(ParseError {
            line: p.line.saturating_sub(1).max(1),
            ..p
        }),
        other => other,
    })?;
    if methods_of(&tree).is_empty() {
        return Err(Error::Contract("method text contains no method with a body".into()));
    }
    Ok(tree)
}

/// All method declarations with bodies, nested types included, in source order.
pub fn methods_of(tree: &SyntaxTree) -> Vec<&MethodDecl> {
    fn collect<'a>(types: &'a [TypeDecl], out: &mut Vec<&'a MethodDecl>) {
        for t in types {
            out.extend(t.methods.iter());
            collect(&t.types, out);
        }
    }
    let mut out = Vec::new();
    collect(&tree.types, &mut out);
    out.sort_by_key(|m| m.span.start);
    out
}

/// Maximum statement depth in `stmts`, relative to their own level.
pub fn nesting_depth(stmts: &[Stmt]) -> u32 {
    let Some(base) = stmts.iter().map(|s| s.depth).min() else {
        return 0;
    };
    stmts
        .iter()
        .map(Stmt::max_depth)
        .max()
        .unwrap_or(base)
        - base
}

/// The innermost method whose body contains `span`.
pub fn enclosing_method(tree: &SyntaxTree, span: Span) -> Option<&MethodDecl> {
    methods_of(tree)
        .into_iter()
        .filter(|m| m.body.span.contains(span))
        .min_by_key(|m| m.body.span.len())
}

/// Tokens of `tree` lying entirely inside `span`.
pub fn tokens_in(tokens: &[Token], span: Span) -> &[Token] {
    let from = tokens.partition_point(|t| t.span.start < span.start);
    let to = tokens.partition_point(|t| t.span.end <= span.end);
    if from >= to {
        &[]
    } else {
        &tokens[from..to]
    }
}
