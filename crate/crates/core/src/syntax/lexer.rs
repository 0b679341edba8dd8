//! Hand-written lexer for the supported Java subset.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LexError;
use crate::syntax::Span;

/// The 50 reserved words of Java. `true`, `false` and `null` are literals,
/// and contextual words such as `var` or `record` lex as identifiers.
pub const RESERVED_WORDS: [&str; 50] = [
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED_WORDS.contains(&word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    CharLiteral,
    BoolLiteral,
    Operator,
    Separator,
    Comment,
}

impl TokenKind {
    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::IntLiteral
                | TokenKind::FloatLiteral
                | TokenKind::StringLiteral
                | TokenKind::CharLiteral
                | TokenKind::BoolLiteral
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based.
    pub line: u32,
    /// 1-based, counted in characters.
    pub col: u32,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_comment(&self) -> bool {
        self.kind == TokenKind::Comment
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({})", self.kind, self.text)
    }
}

// Longest first so that maximal munch works with a simple prefix scan.
const OPERATORS: [&str; 38] = [
    ">>>=", "<<=", ">>=", ">>>", "->", "==", ">=", "<=", "!=", "&&", "||", "++", "--", "+=", "-=",
    "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "=", ">", "<", "!", "~", "?", ":", "+", "-",
    "*", "/", "&", "|", "^", "%",
];

const SEPARATORS: [&str; 11] = ["...", "::", "(", ")", "{", "}", "[", "]", ";", ",", "@"];

/// Tokenizes `source`, keeping comments as [`TokenKind::Comment`] tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source).run()
}

/// Tokenizes and drops comments.
pub fn tokenize_code(source: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = tokenize(source)?;
    tokens.retain(|t| !t.is_comment());
    Ok(tokens)
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            out: Vec::new(),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            let start = self.pos;
            let (line, col) = (self.line, self.col);
            let kind = self.scan_token(c, line, col)?;
            self.out.push(Token {
                kind,
                text: self.src[start..self.pos].to_string(),
                line,
                col,
                span: Span::new(start, self.pos),
            });
        }
        Ok(self.out)
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn byte_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn scan_token(&mut self, c: char, line: u32, col: u32) -> Result<TokenKind, LexError> {
        let rest = &self.src[self.pos..];
        if rest.starts_with("//") {
            while let Some(c) = self.peek_char() {
                if c == '\n' {
                    break;
                }
                self.bump();
            }
            return Ok(TokenKind::Comment);
        }
        if rest.starts_with("/*") {
            self.bump_n(2);
            loop {
                if self.src[self.pos..].starts_with("*/") {
                    self.bump_n(2);
                    return Ok(TokenKind::Comment);
                }
                if self.bump().is_none() {
                    return Err(LexError::new("unterminated block comment", line, col));
                }
            }
        }
        if rest.starts_with("\"\"\"") {
            return self.text_block(line, col);
        }
        if c == '"' {
            self.quoted('"', line, col, "unterminated string literal")?;
            return Ok(TokenKind::StringLiteral);
        }
        if c == '\'' {
            self.quoted('\'', line, col, "unterminated char literal")?;
            return Ok(TokenKind::CharLiteral);
        }
        if c.is_ascii_digit() || (c == '.' && self.byte_at(1).is_some_and(|b| b.is_ascii_digit())) {
            return Ok(self.number());
        }
        if c == '_' || c == '$' || c.is_alphabetic() {
            let start = self.pos;
            while let Some(c) = self.peek_char() {
                if c == '_' || c == '$' || c.is_alphanumeric() {
                    self.bump();
                } else {
                    break;
                }
            }
            let word = &self.src[start..self.pos];
            return Ok(match word {
                "true" | "false" => TokenKind::BoolLiteral,
                w if is_reserved(w) => TokenKind::Keyword,
                _ => TokenKind::Identifier,
            });
        }
        for sep in SEPARATORS {
            if rest.starts_with(sep) {
                self.bump_n(sep.len());
                return Ok(TokenKind::Separator);
            }
        }
        if c == '.' {
            self.bump();
            return Ok(TokenKind::Separator);
        }
        for op in OPERATORS {
            if rest.starts_with(op) {
                self.bump_n(op.len());
                return Ok(TokenKind::Operator);
            }
        }
        Err(LexError::new(format!("unexpected character {c:?}"), line, col))
    }

    fn quoted(&mut self, quote: char, line: u32, col: u32, msg: &str) -> Result<(), LexError> {
        self.bump();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(LexError::new(msg, line, col)),
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(LexError::new(msg, line, col));
                    }
                }
                Some(c) if c == quote => return Ok(()),
                Some(_) => {}
            }
        }
    }

    fn text_block(&mut self, line: u32, col: u32) -> Result<TokenKind, LexError> {
        self.bump_n(3);
        loop {
            if self.src[self.pos..].starts_with("\"\"\"") {
                self.bump_n(3);
                return Ok(TokenKind::StringLiteral);
            }
            match self.bump() {
                None => return Err(LexError::new("unterminated text block", line, col)),
                Some('\\') => {
                    self.bump();
                }
                Some(_) => {}
            }
        }
    }

    fn number(&mut self) -> TokenKind {
        let rest = &self.bytes[self.pos..];
        if rest.len() > 1 && rest[0] == b'0' && matches!(rest[1], b'x' | b'X' | b'b' | b'B') {
            self.bump_n(2);
            while self
                .byte_at(0)
                .is_some_and(|b| b.is_ascii_hexdigit() || b == b'_')
            {
                self.bump();
            }
            if matches!(self.byte_at(0), Some(b'l' | b'L')) {
                self.bump();
            }
            return TokenKind::IntLiteral;
        }
        let mut float = false;
        self.digits();
        if self.byte_at(0) == Some(b'.') && self.byte_at(1).is_some_and(|b| b.is_ascii_digit()) {
            float = true;
            self.bump();
            self.digits();
        } else if self.byte_at(0) == Some(b'.')
            && !self.byte_at(1).is_some_and(|b| b.is_ascii_alphabetic() || b == b'.')
        {
            // `1.` is a valid double literal
            float = true;
            self.bump();
        }
        if matches!(self.byte_at(0), Some(b'e' | b'E')) {
            let sign = matches!(self.byte_at(1), Some(b'+' | b'-')) as usize;
            if self.byte_at(1 + sign).is_some_and(|b| b.is_ascii_digit()) {
                float = true;
                self.bump_n(1 + sign);
                self.digits();
            }
        }
        match self.byte_at(0) {
            Some(b'f' | b'F' | b'd' | b'D') => {
                self.bump();
                TokenKind::FloatLiteral
            }
            Some(b'l' | b'L') if !float => {
                self.bump();
                TokenKind::IntLiteral
            }
            _ if float => TokenKind::FloatLiteral,
            _ => TokenKind::IntLiteral,
        }
    }

    fn digits(&mut self) {
        while self.byte_at(0).is_some_and(|b| b.is_ascii_digit() || b == b'_') {
            self.bump();
        }
    }
}
