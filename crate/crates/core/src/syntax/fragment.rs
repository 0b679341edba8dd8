use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::ast::{count_statements, Block, BlockId, MethodDecl, Stmt, SyntaxTree};
use crate::syntax::lexer::{tokenize_code, Token};
use crate::syntax::parser::Parser;
use crate::syntax::{enclosing_method, tokens_in, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    NotCode,
    IncompleteStatement,
    LexError,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::NotCode => "not-code",
            RejectReason::IncompleteStatement => "incomplete-statement",
            RejectReason::LexError => "lex-error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentRejection {
    pub reason: RejectReason,
    pub message: String,
}

impl fmt::Display for FragmentRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.message)
    }
}

/// Statements parsed from free-standing text, with offsets relative to it.
#[derive(Debug, Clone)]
pub struct ParsedFragment {
    pub text: String,
    pub tokens: Vec<Token>,
    pub statements: Vec<Stmt>,
}

/// Checks that `text` is one or more complete statements.
pub fn parse_fragment(text: &str) -> Result<ParsedFragment, FragmentRejection> {
    let tokens = tokenize_code(text).map_err(|e| FragmentRejection {
        reason: RejectReason::LexError,
        message: e.to_string(),
    })?;
    if tokens.is_empty() {
        return Err(FragmentRejection {
            reason: RejectReason::NotCode,
            message: "no code tokens".into(),
        });
    }
    let statements = Parser::new(text, &tokens, false)
        .fragment_statements()
        .map_err(|e| {
            let structural = tokens
                .iter()
                .any(|t| matches!(t.text.as_str(), ";" | "{" | "}"));
            let reason = if (e.at_eof || e.message.starts_with("unbalanced")) && structural {
                RejectReason::IncompleteStatement
            } else {
                RejectReason::NotCode
            };
            FragmentRejection {
                reason,
                message: e.to_string(),
            }
        })?;
    Ok(ParsedFragment {
        text: text.to_string(),
        tokens,
        statements,
    })
}

/// Where a fragment sits inside its enclosing method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FragmentLocation {
    pub block: BlockId,
    /// Index of the first statement within the block.
    pub start: usize,
    pub len: usize,
}

/// A contiguous run of sibling statements plus its location.
#[derive(Debug, Clone)]
pub struct CodeFragment {
    pub text: String,
    pub path: String,
    pub span: Span,
    /// The top-level statements of the run; nested ones hang off them.
    pub statements: Vec<Stmt>,
    /// Non-comment tokens covered by the fragment.
    pub tokens: Vec<Token>,
    /// `None` for raw pasted text that was not located in a method.
    pub location: Option<FragmentLocation>,
}

impl CodeFragment {
    /// Builds the fragment for statements `start..start+len` of `block`.
    pub fn from_run(tree: &SyntaxTree, block: &Block, start: usize, len: usize) -> Self {
        Self::from_parts(&tree.source, &tree.tokens, &tree.path, block, start, len)
    }

    pub(crate) fn from_parts(
        source: &str,
        tokens: &[Token],
        path: &str,
        block: &Block,
        start: usize,
        len: usize,
    ) -> Self {
        assert!(len >= 1 && start + len <= block.stmts.len(), "run out of range");
        let stmts = &block.stmts[start..start + len];
        let span = Span::new(stmts[0].span.start, stmts[len - 1].span.end);
        Self {
            text: source[span.start..span.end].to_string(),
            path: path.to_string(),
            span,
            statements: stmts.to_vec(),
            tokens: tokens_in(tokens, span).to_vec(),
            location: Some(FragmentLocation {
                block: block.id,
                start,
                len,
            }),
        }
    }

    pub fn from_parsed(parsed: ParsedFragment, path: &str) -> Self {
        let span = match (parsed.tokens.first(), parsed.tokens.last()) {
            (Some(a), Some(b)) => Span::new(a.span.start, b.span.end),
            _ => Span::new(0, 0),
        };
        Self {
            text: parsed.text,
            path: path.to_string(),
            span,
            statements: parsed.statements,
            tokens: parsed.tokens,
            location: None,
        }
    }

    /// Lines holding at least one non-comment token.
    pub fn line_count(&self) -> usize {
        self.tokens
            .iter()
            .map(|t| t.line)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Statement count including nested statements.
    pub fn statement_count(&self) -> usize {
        count_statements(&self.statements)
    }

    /// Whether the fragment is a located run inside `method`.
    pub fn is_within(&self, method: &MethodDecl) -> bool {
        match self.location {
            Some(loc) => {
                method.body.span.contains(self.span)
                    && method
                        .find_block(loc.block)
                        .is_some_and(|b| b.stmts.len() >= loc.start + loc.len
                            && b.stmts[loc.start].span.start == self.span.start)
            }
            None => false,
        }
    }
}

/// Locates the sibling-statement run covering exactly the code tokens of
/// `span` in `tree`, returning it together with its enclosing method.
pub fn locate_fragment(tree: &SyntaxTree, span: Span) -> Option<(&MethodDecl, CodeFragment)> {
    let toks = tokens_in(&tree.tokens, span);
    let trimmed = Span::new(toks.first()?.span.start, toks.last()?.span.end);
    let method = enclosing_method(tree, trimmed)?;
    let mut found = None;
    method.body.walk_blocks(&mut |b| {
        if found.is_some() {
            return;
        }
        let first = b.stmts.iter().position(|s| s.span.start == trimmed.start);
        let last = b.stmts.iter().position(|s| s.span.end == trimmed.end);
        if let (Some(i), Some(j)) = (first, last) {
            if i <= j {
                found = Some(CodeFragment::from_run(tree, b, i, j - i + 1));
            }
        }
    });
    found.map(|f| (method, f))
}
