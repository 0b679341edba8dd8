//! Recursive-descent parser for the supported Java subset.
//!
//! Declarations outside method bodies must follow the grammar. Inside method
//! bodies the parser runs in lenient mode: a statement it cannot structure is
//! kept as [`StmtKind::Opaque`] with its span, so one lambda-heavy or
//! exotic statement never costs the rest of the file. Fragment parsing runs
//! strict and reports the first error instead.

use crate::error::ParseError;
use crate::syntax::ast::*;
use crate::syntax::lexer::{Token, TokenKind};
use crate::syntax::Span;

const PRIMITIVES: [&str; 8] = [
    "boolean", "byte", "char", "short", "int", "long", "float", "double",
];

const MODIFIERS: [&str; 11] = [
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
];

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Copy)]
struct Mark {
    pos: usize,
    gt: usize,
    last_end: usize,
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    toks: &'a [Token],
    pos: usize,
    /// How many `>` of a `>>`/`>>>` token have been consumed by type arguments.
    gt: usize,
    last_end: usize,
    lenient: bool,
    next_block: u32,
}

pub(crate) struct TypeBody {
    fields: Vec<FieldDecl>,
    methods: Vec<MethodDecl>,
    types: Vec<TypeDecl>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, toks: &'a [Token], lenient: bool) -> Self {
        Self {
            src,
            toks,
            pos: 0,
            gt: 0,
            last_end: 0,
            lenient,
            next_block: 0,
        }
    }

    // ----- cursor -------------------------------------------------------

    fn mark(&self) -> Mark {
        Mark {
            pos: self.pos,
            gt: self.gt,
            last_end: self.last_end,
        }
    }

    fn reset(&mut self, m: Mark) {
        self.pos = m.pos;
        self.gt = m.gt;
        self.last_end = m.last_end;
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn tok(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn text(&self) -> &'a str {
        match self.toks.get(self.pos) {
            Some(t) => &t.text[self.gt..],
            None => "",
        }
    }

    fn kind(&self) -> Option<TokenKind> {
        self.tok().map(|t| t.kind)
    }

    fn peek_text(&self, n: usize) -> &'a str {
        self.toks.get(self.pos + n).map_or("", |t| t.text.as_str())
    }

    fn peek_kind(&self, n: usize) -> Option<TokenKind> {
        self.toks.get(self.pos + n).map(|t| t.kind)
    }

    fn start(&self) -> usize {
        match self.toks.get(self.pos) {
            Some(t) => t.span.start + self.gt,
            None => self.src.len(),
        }
    }

    fn advance(&mut self) -> &'a Token {
        let t = &self.toks[self.pos];
        self.pos += 1;
        self.gt = 0;
        self.last_end = t.span.end;
        t
    }

    /// Matches a non-literal token by text (string literals never match).
    fn is(&self, text: &str) -> bool {
        self.gt == 0
            && self
                .tok()
                .is_some_and(|t| t.text == text && !t.kind.is_literal() && t.kind != TokenKind::Identifier)
    }

    fn is_ident(&self) -> bool {
        self.kind() == Some(TokenKind::Identifier)
    }

    fn is_ident_text(&self, text: &str) -> bool {
        self.is_ident() && self.text() == text
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.is(text) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> PResult<()> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{text}`")))
        }
    }

    fn ident(&mut self) -> PResult<(String, usize)> {
        if self.is_ident() {
            let t = self.advance();
            Ok((t.text.clone(), t.span.start))
        } else {
            Err(self.error("expected identifier"))
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let message = message.into();
        match self.tok() {
            Some(t) => ParseError {
                message: format!("{message}, found `{}`", t.text),
                line: t.line,
                col: t.col,
                at_eof: false,
            },
            None => {
                let (line, col) = match self.toks.last() {
                    Some(t) => (t.line, t.col + t.text.chars().count() as u32),
                    None => (1, 1),
                };
                ParseError {
                    message: format!("{message}, found end of input"),
                    line,
                    col,
                    at_eof: true,
                }
            }
        }
    }

    fn slice(&self, start: usize, end: usize) -> String {
        self.src[start..end].to_string()
    }

    fn new_block_id(&mut self) -> BlockId {
        let id = BlockId(self.next_block);
        self.next_block += 1;
        id
    }

    /// Skips a balanced `open ... close` group starting at the current token.
    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect(open)?;
        let mut depth = 1usize;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error(format!("unbalanced `{open}`")));
            }
            if self.is(open) {
                depth += 1;
            } else if self.is(close) {
                depth -= 1;
            }
            self.advance();
        }
        Ok(())
    }

    /// Collects simple names read in the token range, skipping member names
    /// (after `.`) and method names (before `(`).
    fn names_in(&self, from: usize, to: usize) -> Vec<NameRef> {
        let mut out = Vec::new();
        for i in from..to {
            let t = &self.toks[i];
            if t.kind != TokenKind::Identifier {
                continue;
            }
            let after_dot = i > 0 && matches!(self.toks[i - 1].text.as_str(), "." | "::");
            let before_call = self.toks.get(i + 1).is_some_and(|n| n.text == "(");
            if !after_dot && !before_call {
                out.push(NameRef {
                    name: t.text.clone(),
                    offset: t.span.start,
                });
            }
        }
        out
    }

    // ----- compilation unit --------------------------------------------

    pub(crate) fn compilation_unit(&mut self) -> PResult<Vec<TypeDecl>> {
        self.skip_annotations()?;
        if self.eat("package") {
            self.skip_to_semicolon()?;
        }
        while self.is("import") {
            self.advance();
            self.skip_to_semicolon()?;
        }
        let mut types = Vec::new();
        while !self.at_eof() {
            if self.eat(";") {
                continue;
            }
            let start = self.start();
            let mods = self.modifiers()?;
            types.push(self.type_decl(start, &[], mods.is_static)?);
        }
        Ok(types)
    }

    fn skip_to_semicolon(&mut self) -> PResult<()> {
        while !self.eat(";") {
            if self.at_eof() || self.is("{") || self.is("}") {
                return Err(self.error("expected `;`"));
            }
            self.advance();
        }
        Ok(())
    }

    fn skip_annotations(&mut self) -> PResult<()> {
        while self.is("@") && self.peek_text(1) != "interface" {
            self.advance();
            self.qualified_name()?;
            if self.is("(") {
                self.skip_balanced("(", ")")?;
            }
        }
        Ok(())
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let start = self.start();
        self.ident()?;
        while self.is(".") && self.peek_kind(1) == Some(TokenKind::Identifier) {
            self.advance();
            self.advance();
        }
        Ok(self.slice(start, self.last_end))
    }

    fn modifiers(&mut self) -> PResult<Modifiers> {
        let mut mods = Modifiers::default();
        loop {
            self.skip_annotations()?;
            let t = self.text();
            if self.kind() == Some(TokenKind::Keyword) && MODIFIERS.contains(&t) {
                mods.is_static |= t == "static";
                self.advance();
            } else if self.is("default") && self.peek_text(1) != ":" && self.peek_text(1) != "->" {
                self.advance();
            } else if self.is_ident_text("sealed") && self.peek_kind(1) != Some(TokenKind::Operator) {
                self.advance();
            } else if self.is_ident_text("non")
                && self.peek_text(1) == "-"
                && self.peek_text(2) == "sealed"
            {
                self.advance();
                self.advance();
                self.advance();
            } else {
                return Ok(mods);
            }
        }
    }

    fn type_kind_here(&self) -> Option<TypeKind> {
        if self.is("class") {
            Some(TypeKind::Class)
        } else if self.is("interface") {
            Some(TypeKind::Interface)
        } else if self.is("enum") {
            Some(TypeKind::Enum)
        } else if self.is("@") && self.peek_text(1) == "interface" {
            Some(TypeKind::Annotation)
        } else if self.is_ident_text("record")
            && self.peek_kind(1) == Some(TokenKind::Identifier)
            && matches!(self.peek_text(2), "(" | "<")
        {
            Some(TypeKind::Record)
        } else {
            None
        }
    }

    fn type_decl(&mut self, start: usize, outer_fields: &[FieldDecl], _static: bool) -> PResult<TypeDecl> {
        let kind = self
            .type_kind_here()
            .ok_or_else(|| self.error("expected type declaration"))?;
        if kind == TypeKind::Annotation {
            self.advance();
        }
        self.advance();
        let (name, _) = self.ident()?;
        if self.is("<") {
            self.type_params()?;
        }
        let mut record_fields = Vec::new();
        if kind == TypeKind::Record {
            self.expect("(")?;
            while !self.is(")") {
                self.skip_annotations()?;
                let type_text = self.parse_type()?;
                self.eat("...");
                let (fname, _) = self.ident()?;
                record_fields.push(FieldDecl {
                    name: fname,
                    type_text,
                    is_static: false,
                });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        while !self.is("{") {
            if self.at_eof() || self.is(";") || self.is("}") {
                return Err(self.error("expected type body"));
            }
            self.advance();
        }
        let body = self.type_body(&name, kind, record_fields, outer_fields)?;
        Ok(TypeDecl {
            name,
            kind,
            span: Span::new(start, self.last_end),
            fields: body.fields,
            methods: body.methods,
            types: body.types,
        })
    }

    fn type_body(
        &mut self,
        owner: &str,
        kind: TypeKind,
        mut fields: Vec<FieldDecl>,
        outer_fields: &[FieldDecl],
    ) -> PResult<TypeBody> {
        self.expect("{")?;
        if kind == TypeKind::Enum {
            fields.extend(self.enum_constants(owner)?);
        }
        // Members are parsed in two passes: fields first so that every
        // method sees all of them regardless of declaration order.
        let body_start = self.mark();
        self.members(owner, &mut fields, None, outer_fields)?;
        let mut visible = fields.clone();
        visible.extend(outer_fields.iter().cloned());
        self.reset(body_start);
        let mut out = TypeBody {
            fields: Vec::new(),
            methods: Vec::new(),
            types: Vec::new(),
        };
        let mut ignored = Vec::new();
        self.members(owner, &mut ignored, Some(&mut out), &visible)?;
        out.fields = fields;
        self.expect("}")?;
        Ok(out)
    }

    fn enum_constants(&mut self, owner: &str) -> PResult<Vec<FieldDecl>> {
        let mut out = Vec::new();
        loop {
            self.skip_annotations()?;
            if !self.is_ident() {
                break;
            }
            let (name, _) = self.ident()?;
            if self.is("(") {
                self.skip_balanced("(", ")")?;
            }
            if self.is("{") {
                self.skip_balanced("{", "}")?;
            }
            out.push(FieldDecl {
                name,
                type_text: owner.to_string(),
                is_static: true,
            });
            if !self.eat(",") {
                break;
            }
        }
        self.eat(";");
        Ok(out)
    }

    /// Parses class members up to the closing brace. With `out == None`
    /// only field declarations are collected and method bodies are skipped.
    fn members(
        &mut self,
        owner: &str,
        fields: &mut Vec<FieldDecl>,
        mut out: Option<&mut TypeBody>,
        visible: &[FieldDecl],
    ) -> PResult<()> {
        while !self.is("}") {
            if self.at_eof() {
                return Err(self.error("expected `}`"));
            }
            if self.eat(";") {
                continue;
            }
            let start = self.start();
            if self.is("{") || (self.is("static") && self.peek_text(1) == "{") {
                self.eat("static");
                self.skip_balanced("{", "}")?;
                continue;
            }
            let mods = self.modifiers()?;
            if self.type_kind_here().is_some() {
                match out.as_deref_mut() {
                    Some(o) => {
                        let t = self.type_decl(start, visible, mods.is_static)?;
                        o.types.push(t);
                    }
                    None => self.skip_type_decl()?,
                }
                continue;
            }
            let type_params = if self.is("<") {
                let s = self.start();
                self.type_params()?;
                Some(self.slice(s, self.last_end))
            } else {
                None
            };
            // constructor
            if self.is_ident() && self.peek_text(1) == "(" {
                let (name, _) = self.ident()?;
                let m = self.method_rest(start, name, owner, None, type_params, &mods, out.is_some(), visible)?;
                if let (Some(o), Some(m)) = (out.as_deref_mut(), m) {
                    o.methods.push(m);
                }
                continue;
            }
            let ret = if self.is("void") {
                self.advance();
                "void".to_string()
            } else {
                self.parse_type()?
            };
            let (name, _) = self.ident()?;
            if self.is("(") {
                let m = self.method_rest(start, name, owner, Some(ret), type_params, &mods, out.is_some(), visible)?;
                if let (Some(o), Some(m)) = (out.as_deref_mut(), m) {
                    o.methods.push(m);
                }
                continue;
            }
            // field declarators
            let mut name = name;
            loop {
                let mut dims = String::new();
                while self.is("[") && self.peek_text(1) == "]" {
                    self.advance();
                    self.advance();
                    dims.push_str("[]");
                }
                fields.push(FieldDecl {
                    name: name.clone(),
                    type_text: format!("{ret}{dims}"),
                    is_static: mods.is_static,
                });
                if self.eat("=") {
                    self.skip_initializer()?;
                }
                if self.eat(",") {
                    name = self.ident()?.0;
                    continue;
                }
                self.expect(";")?;
                break;
            }
        }
        Ok(())
    }

    fn skip_type_decl(&mut self) -> PResult<()> {
        while !self.is("{") {
            if self.at_eof() {
                return Err(self.error("expected type body"));
            }
            self.advance();
        }
        self.skip_balanced("{", "}")
    }

    /// Skips a field initializer up to (not including) the `,` or `;` that ends it.
    fn skip_initializer(&mut self) -> PResult<()> {
        let mut depth = 0usize;
        loop {
            if self.at_eof() {
                return Err(self.error("unterminated field initializer"));
            }
            if depth == 0 && (self.is(";") || self.is(",")) {
                return Ok(());
            }
            if self.is("(") || self.is("{") || self.is("[") {
                depth += 1;
            } else if self.is(")") || self.is("}") || self.is("]") {
                if depth == 0 {
                    return Err(self.error("unbalanced initializer"));
                }
                depth -= 1;
            }
            self.advance();
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn method_rest(
        &mut self,
        start: usize,
        name: String,
        owner: &str,
        return_type: Option<String>,
        type_params: Option<String>,
        mods: &Modifiers,
        build: bool,
        visible: &[FieldDecl],
    ) -> PResult<Option<MethodDecl>> {
        let params = self.formal_params()?;
        while self.is("[") {
            self.advance();
            self.expect("]")?;
        }
        let throws = if self.eat("throws") {
            let s = self.start();
            while !self.is("{") && !self.is(";") {
                if self.at_eof() {
                    return Err(self.error("expected method body"));
                }
                self.advance();
            }
            Some(self.slice(s, self.last_end))
        } else {
            None
        };
        if self.eat("default") {
            // annotation element default value
            self.skip_initializer()?;
        }
        if self.eat(";") {
            return Ok(None);
        }
        if !build {
            self.skip_balanced("{", "}")?;
            return Ok(None);
        }
        self.next_block = 0;
        let body_open = self.pos;
        let body = self.block(0)?;
        let body_tokens = self.toks[body_open + 1..self.pos - 1].to_vec();
        Ok(Some(MethodDecl {
            name,
            owner: owner.to_string(),
            params,
            return_type,
            type_params,
            throws,
            is_static: mods.is_static,
            span: Span::new(start, self.last_end),
            body,
            body_tokens,
            visible_fields: visible.to_vec(),
        }))
    }

    fn formal_params(&mut self) -> PResult<Vec<Param>> {
        self.expect("(")?;
        let mut params = Vec::new();
        while !self.is(")") {
            self.modifiers()?;
            let mut type_text = self.parse_type()?;
            if self.eat("...") {
                type_text.push_str("...");
            }
            if self.is("this") {
                // receiver parameter
                self.advance();
            } else {
                let (name, _) = self.ident()?;
                while self.is("[") && self.peek_text(1) == "]" {
                    self.advance();
                    self.advance();
                    type_text.push_str("[]");
                }
                if params.iter().any(|p: &Param| p.name == name) {
                    return Err(self.error(format!("duplicate parameter `{name}`")));
                }
                params.push(Param { name, type_text });
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    fn type_params(&mut self) -> PResult<()> {
        self.expect("<")?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error("unbalanced type parameters"));
            }
            if self.is("<") {
                depth += 1;
                self.advance();
            } else if self.text().starts_with('>') && self.text().chars().all(|c| c == '>') {
                self.eat_gt();
                depth -= 1;
            } else {
                self.advance();
            }
        }
        Ok(())
    }

    // ----- types --------------------------------------------------------

    fn eat_gt(&mut self) -> bool {
        let t = self.text();
        if t.is_empty() || !t.chars().all(|c| c == '>') || self.kind() != Some(TokenKind::Operator) {
            return false;
        }
        if t.len() == 1 {
            self.advance();
        } else {
            self.gt += 1;
            self.last_end = self.toks[self.pos].span.start + self.gt;
        }
        true
    }

    /// Parses a type and returns its source text.
    pub(crate) fn parse_type(&mut self) -> PResult<String> {
        self.skip_annotations()?;
        let start = self.start();
        if self.kind() == Some(TokenKind::Keyword) && PRIMITIVES.contains(&self.text()) {
            self.advance();
        } else if self.is_ident() {
            loop {
                self.ident()?;
                if self.is("<") {
                    self.type_args()?;
                }
                if self.is(".") && self.peek_kind(1) == Some(TokenKind::Identifier) {
                    self.advance();
                    continue;
                }
                break;
            }
        } else {
            return Err(self.error("expected type"));
        }
        while self.is("[") && self.peek_text(1) == "]" {
            self.advance();
            self.advance();
        }
        Ok(self.slice(start, self.last_end))
    }

    fn type_args(&mut self) -> PResult<()> {
        self.expect("<")?;
        if self.eat_gt() {
            return Ok(()); // diamond
        }
        loop {
            self.skip_annotations()?;
            if self.eat("?") {
                if self.eat("extends") || self.eat("super") {
                    self.parse_type()?;
                }
            } else {
                self.parse_type()?;
                while self.eat("&") {
                    self.parse_type()?;
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        if self.eat_gt() {
            Ok(())
        } else {
            Err(self.error("expected `>`"))
        }
    }

    /// Speculatively parses `Type Ident` and rewinds; true if a local
    /// variable declaration starts here.
    fn looks_like_decl(&mut self) -> bool {
        let m = self.mark();
        let ok = self.skip_annotations().is_ok()
            && {
                while self.is("final") {
                    self.advance();
                    let _ = self.skip_annotations();
                }
                true
            }
            && self.parse_type().is_ok()
            && self.is_ident()
            && {
                self.advance();
                matches!(self.text(), "=" | ";" | "," | "[" | ":")
            };
        self.reset(m);
        ok
    }

    // ----- statements ---------------------------------------------------

    /// Parses a braced block whose statements sit at `depth`.
    pub(crate) fn block(&mut self, depth: u32) -> PResult<Block> {
        let start = self.start();
        let id = self.new_block_id();
        self.expect("{")?;
        let stmts = self.statements_until_close(depth)?;
        self.expect("}")?;
        Ok(Block {
            id,
            span: Span::new(start, self.last_end),
            braced: true,
            stmts,
        })
    }

    fn statements_until_close(&mut self, depth: u32) -> PResult<Vec<Stmt>> {
        let mut stmts = Vec::new();
        while !self.is("}") {
            if self.at_eof() {
                return Err(self.error("expected `}`"));
            }
            stmts.push(self.block_statement(depth)?);
        }
        Ok(stmts)
    }

    /// Parses statements until end of input (fragment mode).
    pub(crate) fn fragment_statements(&mut self) -> PResult<Vec<Stmt>> {
        self.next_block = 0;
        let mut stmts = Vec::new();
        while !self.at_eof() {
            if self.is("}") {
                return Err(self.error("unbalanced `}`"));
            }
            stmts.push(self.block_statement(0)?);
        }
        Ok(stmts)
    }

    fn block_statement(&mut self, depth: u32) -> PResult<Stmt> {
        let m = self.mark();
        let blocks = self.next_block;
        match self.statement(depth) {
            Ok(s) => Ok(s),
            Err(e) if self.lenient => {
                if self.at_eof() && e.at_eof {
                    return Err(e);
                }
                self.reset(m);
                self.next_block = blocks;
                self.opaque_statement(depth).map_err(|_| e)
            }
            Err(e) => Err(e),
        }
    }

    fn opaque_statement(&mut self, depth: u32) -> PResult<Stmt> {
        let start = self.start();
        let from = self.pos;
        let mut nest = 0usize;
        loop {
            if self.at_eof() {
                return Err(self.error("unterminated statement"));
            }
            if nest == 0 && self.is("}") {
                if self.pos == from {
                    return Err(self.error("unexpected `}`"));
                }
                break;
            }
            if self.is("{") || self.is("(") || self.is("[") {
                nest += 1;
            } else if self.is("}") || self.is(")") || self.is("]") {
                nest = nest.saturating_sub(1);
                if nest == 0 && self.is("}") {
                    self.advance();
                    if !self.is(";") && !self.is(")") && !self.is(",") && !self.is(".") {
                        break;
                    }
                    continue;
                }
            } else if nest == 0 && self.is(";") {
                self.advance();
                break;
            }
            self.advance();
        }
        Ok(Stmt {
            kind: StmtKind::Opaque {
                reads: self.names_in(from, self.pos),
            },
            span: Span::new(start, self.last_end),
            depth,
            label: None,
        })
    }

    fn finish(&self, kind: StmtKind, start: usize, depth: u32) -> Stmt {
        Stmt {
            kind,
            span: Span::new(start, self.last_end),
            depth,
            label: None,
        }
    }

    /// A nested statement body: a braced block, or a single statement
    /// wrapped in an unbraced block.
    fn body(&mut self, depth: u32) -> PResult<Block> {
        if self.is("{") {
            return self.block(depth + 1);
        }
        let id = self.new_block_id();
        let stmt = self.statement(depth + 1)?;
        Ok(Block {
            id,
            span: stmt.span,
            braced: false,
            stmts: vec![stmt],
        })
    }

    fn statement(&mut self, depth: u32) -> PResult<Stmt> {
        let start = self.start();
        if self.is_ident() && self.peek_text(1) == ":" && self.peek_text(2) != ":" {
            let (label, _) = self.ident()?;
            self.advance();
            let mut s = self.statement(depth)?;
            s.label = Some(label);
            s.span = Span::new(start, s.span.end);
            return Ok(s);
        }
        if self.is("{") {
            let b = self.block(depth + 1)?;
            return Ok(self.finish(StmtKind::Block(b), start, depth));
        }
        if self.eat(";") {
            return Ok(self.finish(StmtKind::Empty, start, depth));
        }
        if self.is("if") {
            self.advance();
            let cond = self.paren_expr()?;
            let then_branch = self.body(depth)?;
            let else_branch = if self.eat("else") {
                if self.is("if") {
                    let id = self.new_block_id();
                    let inner = self.statement(depth)?;
                    Some(Block {
                        id,
                        span: inner.span,
                        braced: false,
                        stmts: vec![inner],
                    })
                } else {
                    Some(self.body(depth)?)
                }
            } else {
                None
            };
            return Ok(self.finish(
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                },
                start,
                depth,
            ));
        }
        if self.eat("while") {
            let cond = self.paren_expr()?;
            let body = self.body(depth)?;
            return Ok(self.finish(StmtKind::While { cond, body }, start, depth));
        }
        if self.eat("do") {
            let body = self.body(depth)?;
            self.expect("while")?;
            let cond = self.paren_expr()?;
            self.expect(";")?;
            return Ok(self.finish(StmtKind::DoWhile { body, cond }, start, depth));
        }
        if self.eat("for") {
            return self.for_statement(start, depth);
        }
        if self.eat("switch") {
            let selector = self.paren_expr()?;
            let cases = self.switch_body(depth)?;
            return Ok(self.finish(StmtKind::Switch { selector, cases }, start, depth));
        }
        if self.eat("try") {
            return self.try_statement(start, depth);
        }
        if self.eat("return") {
            let value = if self.is(";") { None } else { Some(self.expr()?) };
            self.expect(";")?;
            return Ok(self.finish(StmtKind::Return(value), start, depth));
        }
        if self.eat("throw") {
            let e = self.expr()?;
            self.expect(";")?;
            return Ok(self.finish(StmtKind::Throw(e), start, depth));
        }
        if self.is("break") || self.is("continue") {
            let is_break = self.is("break");
            self.advance();
            let label = if self.is_ident() { Some(self.ident()?.0) } else { None };
            self.expect(";")?;
            let kind = if is_break {
                StmtKind::Break(label)
            } else {
                StmtKind::Continue(label)
            };
            return Ok(self.finish(kind, start, depth));
        }
        if self.is("synchronized") && self.peek_text(1) == "(" {
            self.advance();
            let lock = self.paren_expr()?;
            let body = self.block(depth + 1)?;
            return Ok(self.finish(StmtKind::Synchronized { lock, body }, start, depth));
        }
        if self.eat("assert") {
            let cond = self.expr()?;
            let message = if self.eat(":") { Some(self.expr()?) } else { None };
            self.expect(";")?;
            return Ok(self.finish(StmtKind::Assert { cond, message }, start, depth));
        }
        if self.is_ident_text("yield")
            && !matches!(self.peek_text(1), "=" | "(" | "." | "[" | ";" | "++" | "--")
            && self.peek_kind(1).is_some()
        {
            self.advance();
            let e = self.expr()?;
            self.expect(";")?;
            return Ok(self.finish(StmtKind::Yield(e), start, depth));
        }
        if self.is_local_type_decl() {
            return self.opaque_statement(depth);
        }
        if self.looks_like_decl() {
            let (type_text, declarators) = self.local_var_decl()?;
            self.expect(";")?;
            return Ok(self.finish(
                StmtKind::LocalVar {
                    type_text,
                    declarators,
                },
                start,
                depth,
            ));
        }
        let e = self.expr()?;
        if !e.is_statement_expression() {
            return Err(ParseError {
                message: "not a statement".into(),
                line: self.toks.iter().find(|t| t.span.start >= e.span.start).map_or(1, |t| t.line),
                col: self.toks.iter().find(|t| t.span.start >= e.span.start).map_or(1, |t| t.col),
                at_eof: false,
            });
        }
        self.expect(";")?;
        Ok(self.finish(StmtKind::Expr(e), start, depth))
    }

    fn is_local_type_decl(&self) -> bool {
        let mut i = 0;
        while matches!(self.peek_text(i), "final" | "abstract" | "static" | "strictfp")
            && self.peek_kind(i) == Some(TokenKind::Keyword)
        {
            i += 1;
        }
        match self.peek_text(i) {
            "class" | "interface" | "enum" => self.peek_kind(i) == Some(TokenKind::Keyword),
            "record" => {
                self.peek_kind(i + 1) == Some(TokenKind::Identifier) && self.peek_text(i + 2) == "("
            }
            _ => false,
        }
    }

    fn local_var_decl(&mut self) -> PResult<(String, Vec<Declarator>)> {
        self.modifiers()?;
        let type_text = self.parse_type()?;
        let mut declarators = Vec::new();
        loop {
            declarators.push(self.declarator()?);
            if !self.eat(",") {
                break;
            }
        }
        Ok((type_text, declarators))
    }

    fn declarator(&mut self) -> PResult<Declarator> {
        let (name, offset) = self.ident()?;
        let mut dims = 0;
        while self.is("[") && self.peek_text(1) == "]" {
            self.advance();
            self.advance();
            dims += 1;
        }
        let init = if self.eat("=") {
            Some(self.var_init()?)
        } else {
            None
        };
        Ok(Declarator {
            name,
            offset,
            dims,
            init,
        })
    }

    fn var_init(&mut self) -> PResult<Expr> {
        if self.is("{") {
            self.array_init()
        } else {
            self.expr()
        }
    }

    fn array_init(&mut self) -> PResult<Expr> {
        let start = self.start();
        self.expect("{")?;
        let mut items = Vec::new();
        while !self.is("}") {
            items.push(self.var_init()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(Expr {
            kind: ExprKind::ArrayInit(items),
            span: Span::new(start, self.last_end),
        })
    }

    fn for_statement(&mut self, start: usize, depth: u32) -> PResult<Stmt> {
        self.expect("(")?;
        // enhanced for
        let m = self.mark();
        if self.looks_like_decl() {
            self.modifiers()?;
            let type_text = self.parse_type()?;
            let (name, offset) = self.ident()?;
            if self.eat(":") {
                let iterable = self.expr()?;
                self.expect(")")?;
                let body = self.body(depth)?;
                return Ok(self.finish(
                    StmtKind::ForEach {
                        type_text,
                        var: Declarator {
                            name,
                            offset,
                            dims: 0,
                            init: None,
                        },
                        iterable,
                        body,
                    },
                    start,
                    depth,
                ));
            }
            self.reset(m);
        }
        let init = if self.is(";") {
            None
        } else if self.looks_like_decl() {
            let (type_text, declarators) = self.local_var_decl()?;
            Some(ForInit::Decl {
                type_text,
                declarators,
            })
        } else {
            Some(ForInit::Exprs(self.expr_list()?))
        };
        self.expect(";")?;
        let cond = if self.is(";") { None } else { Some(self.expr()?) };
        self.expect(";")?;
        let update = if self.is(")") {
            Vec::new()
        } else {
            self.expr_list()?
        };
        self.expect(")")?;
        let body = self.body(depth)?;
        Ok(self.finish(
            StmtKind::For {
                init,
                cond,
                update,
                body,
            },
            start,
            depth,
        ))
    }

    fn expr_list(&mut self) -> PResult<Vec<Expr>> {
        let mut v = vec![self.expr()?];
        while self.eat(",") {
            v.push(self.expr()?);
        }
        Ok(v)
    }

    fn switch_body(&mut self, depth: u32) -> PResult<Vec<SwitchCase>> {
        self.expect("{")?;
        let mut cases = Vec::new();
        while !self.is("}") {
            let mut labels = Vec::new();
            if self.eat("default") {
            } else if self.eat("case") {
                loop {
                    labels.push(self.ternary()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            } else {
                return Err(self.error("expected `case` or `default`"));
            }
            if self.eat("->") {
                let body = if self.is("{") {
                    self.block(depth + 1)?
                } else {
                    let id = self.new_block_id();
                    let s = if self.is("throw") {
                        self.statement(depth + 1)?
                    } else {
                        let s0 = self.start();
                        let e = self.expr()?;
                        self.expect(";")?;
                        self.finish(StmtKind::Expr(e), s0, depth + 1)
                    };
                    Block {
                        id,
                        span: s.span,
                        braced: false,
                        stmts: vec![s],
                    }
                };
                cases.push(SwitchCase { labels, body });
                continue;
            }
            self.expect(":")?;
            let id = self.new_block_id();
            let body_start = self.start();
            let mut stmts = Vec::new();
            while !self.is("case") && !self.is("default") && !self.is("}") {
                if self.at_eof() {
                    return Err(self.error("expected `}`"));
                }
                stmts.push(self.block_statement(depth + 1)?);
            }
            let span = match (stmts.first(), stmts.last()) {
                (Some(a), Some(b)) => Span::new(a.span.start, b.span.end),
                _ => Span::new(body_start, body_start),
            };
            cases.push(SwitchCase {
                labels,
                body: Block {
                    id,
                    span,
                    braced: false,
                    stmts,
                },
            });
        }
        self.expect("}")?;
        Ok(cases)
    }

    fn try_statement(&mut self, start: usize, depth: u32) -> PResult<Stmt> {
        let mut resources = Vec::new();
        if self.eat("(") {
            while !self.is(")") {
                if self.looks_like_decl() {
                    self.modifiers()?;
                    let type_text = self.parse_type()?;
                    let d = self.declarator()?;
                    resources.push(Resource {
                        decl: Some((type_text, d)),
                        expr: None,
                    });
                } else {
                    resources.push(Resource {
                        decl: None,
                        expr: Some(self.expr()?),
                    });
                }
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
        }
        let body = self.block(depth + 1)?;
        let mut catches = Vec::new();
        while self.eat("catch") {
            self.expect("(")?;
            self.modifiers()?;
            let ts = self.start();
            self.parse_type()?;
            while self.eat("|") {
                self.parse_type()?;
            }
            let type_text = self.slice(ts, self.last_end);
            let (name, offset) = self.ident()?;
            self.expect(")")?;
            let body = self.block(depth + 1)?;
            catches.push(CatchClause {
                type_text,
                name,
                offset,
                body,
            });
        }
        let finally = if self.eat("finally") {
            Some(self.block(depth + 1)?)
        } else {
            None
        };
        if catches.is_empty() && finally.is_none() && resources.is_empty() {
            return Err(self.error("expected `catch` or `finally`"));
        }
        Ok(self.finish(
            StmtKind::Try {
                resources,
                body,
                catches,
                finally,
            },
            start,
            depth,
        ))
    }

    // ----- expressions --------------------------------------------------

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect("(")?;
        let e = self.expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn mk(&self, kind: ExprKind, start: usize) -> Expr {
        Expr {
            kind,
            span: Span::new(start, self.last_end),
        }
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        if let Some(l) = self.try_lambda()? {
            return Ok(l);
        }
        let start = self.start();
        let lhs = self.ternary()?;
        let op = self.text();
        if self.kind() == Some(TokenKind::Operator)
            && self.gt == 0
            && matches!(
                op,
                "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=" | ">>>="
            )
        {
            let op = op.to_string();
            self.advance();
            let value = self.expr()?;
            return Ok(self.mk(
                ExprKind::Assign {
                    op,
                    target: Box::new(lhs),
                    value: Box::new(value),
                },
                start,
            ));
        }
        Ok(lhs)
    }

    fn try_lambda(&mut self) -> PResult<Option<Expr>> {
        let start = self.start();
        let params = if self.is_ident() && self.peek_text(1) == "->" {
            let (n, _) = self.ident()?;
            vec![n]
        } else if self.is("(") {
            // find the matching paren and check for an arrow after it
            let mut depth = 0usize;
            let mut i = self.pos;
            loop {
                let Some(t) = self.toks.get(i) else {
                    return Ok(None);
                };
                match t.text.as_str() {
                    "(" => depth += 1,
                    ")" => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            if self.toks.get(i + 1).map(|t| t.text.as_str()) != Some("->") {
                return Ok(None);
            }
            let mut params = Vec::new();
            for j in self.pos + 1..i {
                let t = &self.toks[j];
                let next = self.toks[j + 1].text.as_str();
                if t.kind == TokenKind::Identifier && (next == "," || next == ")") {
                    params.push(t.text.clone());
                }
            }
            while self.pos <= i {
                self.advance();
            }
            params
        } else {
            return Ok(None);
        };
        self.expect("->")?;
        let body = if self.is("{") {
            LambdaBody::Block(self.block(0)?)
        } else {
            LambdaBody::Expr(Box::new(self.expr()?))
        };
        Ok(Some(self.mk(ExprKind::Lambda { params, body }, start)))
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let cond = self.binary(1)?;
        if self.eat("?") {
            let then_expr = self.expr()?;
            self.expect(":")?;
            let else_expr = match self.try_lambda()? {
                Some(l) => l,
                None => self.ternary()?,
            };
            return Ok(self.mk(
                ExprKind::Conditional {
                    cond: Box::new(cond),
                    then_expr: Box::new(then_expr),
                    else_expr: Box::new(else_expr),
                },
                start,
            ));
        }
        Ok(cond)
    }

    fn binary_prec(&self) -> Option<u8> {
        if self.gt != 0 {
            return None;
        }
        let k = self.kind()?;
        if k == TokenKind::Keyword && self.text() == "instanceof" {
            return Some(7);
        }
        if k != TokenKind::Operator {
            return None;
        }
        Some(match self.text() {
            "||" => 1,
            "&&" => 2,
            "|" => 3,
            "^" => 4,
            "&" => 5,
            "==" | "!=" => 6,
            "<" | ">" | "<=" | ">=" => 7,
            "<<" | ">>" | ">>>" => 8,
            "+" | "-" => 9,
            "*" | "/" | "%" => 10,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.start();
        let mut lhs = self.unary()?;
        while let Some(prec) = self.binary_prec() {
            if prec < min_prec {
                break;
            }
            if self.eat("instanceof") {
                self.eat("final");
                let type_text = self.parse_type()?;
                let binding = if self.is_ident() {
                    Some(self.ident()?)
                } else {
                    None
                };
                lhs = self.mk(
                    ExprKind::InstanceOf {
                        expr: Box::new(lhs),
                        type_text,
                        binding,
                    },
                    start,
                );
                continue;
            }
            let op = self.advance().text.clone();
            let rhs = self.binary(prec + 1)?;
            lhs = self.mk(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                start,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.start();
        if self.kind() == Some(TokenKind::Operator)
            && matches!(self.text(), "+" | "-" | "!" | "~" | "++" | "--")
        {
            let op = self.advance().text.clone();
            let operand = self.unary()?;
            return Ok(self.mk(
                ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                    postfix: false,
                },
                start,
            ));
        }
        if self.is("(") {
            if let Some(cast) = self.try_cast()? {
                return Ok(cast);
            }
        }
        let mut e = self.primary()?;
        loop {
            if self.is(".") {
                self.advance();
                if self.is("<") {
                    self.type_args()?;
                }
                if self.eat("new") {
                    let inner = self.creator(start, Some(e))?;
                    e = inner;
                    continue;
                }
                if self.eat("class") {
                    let text = self.slice(start, self.last_end - ".class".len());
                    e = self.mk(ExprKind::ClassLit(text.trim_end().to_string()), start);
                    continue;
                }
                if self.eat("this") {
                    e = self.mk(ExprKind::This, start);
                    continue;
                }
                if self.eat("super") {
                    e = self.mk(ExprKind::Super, start);
                    continue;
                }
                let (name, _) = self.ident()?;
                if self.is("(") {
                    let args = self.args()?;
                    e = self.mk(
                        ExprKind::Call {
                            target: Some(Box::new(e)),
                            name,
                            args,
                        },
                        start,
                    );
                } else {
                    e = self.mk(
                        ExprKind::Field {
                            target: Box::new(e),
                            name,
                        },
                        start,
                    );
                }
            } else if self.is("[") {
                self.advance();
                let index = self.expr()?;
                self.expect("]")?;
                e = self.mk(
                    ExprKind::Index {
                        target: Box::new(e),
                        index: Box::new(index),
                    },
                    start,
                );
            } else if self.is("++") || self.is("--") {
                let op = self.advance().text.clone();
                e = self.mk(
                    ExprKind::Unary {
                        op,
                        operand: Box::new(e),
                        postfix: true,
                    },
                    start,
                );
            } else if self.eat("::") {
                let name = if self.eat("new") {
                    "new".to_string()
                } else {
                    self.ident()?.0
                };
                e = self.mk(
                    ExprKind::MethodRef {
                        target: Box::new(e),
                        name,
                    },
                    start,
                );
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn try_cast(&mut self) -> PResult<Option<Expr>> {
        let m = self.mark();
        let start = self.start();
        self.advance();
        let primitive = self.kind() == Some(TokenKind::Keyword) && PRIMITIVES.contains(&self.text());
        let Ok(type_text) = self.parse_type() else {
            self.reset(m);
            return Ok(None);
        };
        while self.eat("&") {
            if self.parse_type().is_err() {
                self.reset(m);
                return Ok(None);
            }
        }
        if !self.eat(")") {
            self.reset(m);
            return Ok(None);
        }
        let operand_follows = match self.kind() {
            None => false,
            Some(TokenKind::Identifier) => true,
            Some(k) if k.is_literal() => true,
            Some(TokenKind::Keyword) => {
                matches!(self.text(), "this" | "super" | "new" | "switch") || PRIMITIVES.contains(&self.text())
            }
            Some(TokenKind::Separator) => self.is("("),
            Some(TokenKind::Operator) => {
                matches!(self.text(), "!" | "~") || (primitive && matches!(self.text(), "+" | "-" | "++" | "--"))
            }
            _ => false,
        };
        if !operand_follows {
            self.reset(m);
            return Ok(None);
        }
        let expr = match self.try_lambda()? {
            Some(l) => l,
            None => self.unary()?,
        };
        Ok(Some(self.mk(
            ExprKind::Cast {
                type_text,
                expr: Box::new(expr),
            },
            start,
        )))
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        while !self.is(")") {
            args.push(self.expr()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let Some(tok) = self.tok() else {
            return Err(self.error("expected expression"));
        };
        if self.gt != 0 {
            return Err(self.error("expected expression"));
        }
        match tok.kind {
            k if k.is_literal() => {
                self.advance();
                return Ok(self.mk(ExprKind::Literal(k), start));
            }
            TokenKind::Identifier => {
                let name = self.advance().text.clone();
                if self.is("(") {
                    let args = self.args()?;
                    return Ok(self.mk(
                        ExprKind::Call {
                            target: None,
                            name,
                            args,
                        },
                        start,
                    ));
                }
                // generic type before `::`, e.g. `List<String>::size`
                if self.is("<") {
                    let m = self.mark();
                    if self.type_args().is_ok() && self.is("::") {
                        return Ok(self.mk(ExprKind::Name(name), start));
                    }
                    self.reset(m);
                }
                // array type before `::` or `.class`
                if self.is("[") && self.peek_text(1) == "]" {
                    while self.is("[") && self.peek_text(1) == "]" {
                        self.advance();
                        self.advance();
                    }
                    return Ok(self.mk(ExprKind::Name(name), start));
                }
                return Ok(self.mk(ExprKind::Name(name), start));
            }
            _ => {}
        }
        if self.eat("this") {
            if self.is("(") {
                let args = self.args()?;
                return Ok(self.mk(
                    ExprKind::Call {
                        target: None,
                        name: "this".into(),
                        args,
                    },
                    start,
                ));
            }
            return Ok(self.mk(ExprKind::This, start));
        }
        if self.eat("super") {
            if self.is("(") {
                let args = self.args()?;
                return Ok(self.mk(
                    ExprKind::Call {
                        target: None,
                        name: "super".into(),
                        args,
                    },
                    start,
                ));
            }
            return Ok(self.mk(ExprKind::Super, start));
        }
        if self.is("(") {
            self.advance();
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(Expr {
                kind: e.kind,
                span: Span::new(start, self.last_end),
            });
        }
        if self.eat("new") {
            return self.creator(start, None);
        }
        if self.is("switch") {
            let from = self.pos;
            self.advance();
            self.skip_balanced("(", ")")?;
            self.skip_balanced("{", "}")?;
            let names = self.names_in(from, self.pos);
            return Ok(self.mk(ExprKind::Opaque(names), start));
        }
        if self.kind() == Some(TokenKind::Keyword) && (PRIMITIVES.contains(&self.text()) || self.is("void")) {
            // `int.class`, `int[].class`, `int[]::new`
            self.advance();
            while self.is("[") && self.peek_text(1) == "]" {
                self.advance();
                self.advance();
            }
            if self.is(".") && self.peek_text(1) == "class" {
                self.advance();
                self.advance();
                let text = self.slice(start, self.last_end - ".class".len());
                return Ok(self.mk(ExprKind::ClassLit(text), start));
            }
            if self.is("::") {
                return Ok(self.mk(ExprKind::Opaque(Vec::new()), start));
            }
            return Err(self.error("expected expression"));
        }
        if self.is("@") {
            // annotated type in a cast or similar; unsupported in expressions
            return Err(self.error("unexpected annotation"));
        }
        Err(self.error("expected expression"))
    }

    fn creator(&mut self, start: usize, outer: Option<Expr>) -> PResult<Expr> {
        if self.is("<") {
            self.type_args()?;
        }
        self.skip_annotations()?;
        let ts = self.start();
        if self.kind() == Some(TokenKind::Keyword) && PRIMITIVES.contains(&self.text()) {
            self.advance();
        } else {
            loop {
                self.ident()?;
                if self.is("<") {
                    self.type_args()?;
                }
                if self.is(".") && self.peek_kind(1) == Some(TokenKind::Identifier) {
                    self.advance();
                    continue;
                }
                break;
            }
        }
        let base = self.slice(ts, self.last_end);
        if self.is("[") {
            let mut dims = Vec::new();
            let mut rank = 0;
            while self.is("[") {
                self.advance();
                if !self.is("]") {
                    dims.push(self.expr()?);
                }
                self.expect("]")?;
                rank += 1;
            }
            let init = if self.is("{") {
                Some(Box::new(self.array_init()?))
            } else {
                None
            };
            if dims.is_empty() && init.is_none() {
                return Err(self.error("array creation needs a size or initializer"));
            }
            return Ok(self.mk(
                ExprKind::NewArray {
                    type_text: format!("{base}{}", "[]".repeat(rank)),
                    dims,
                    init,
                },
                start,
            ));
        }
        let args = self.args()?;
        let body = if self.is("{") {
            let from = self.pos;
            self.skip_balanced("{", "}")?;
            Some(self.names_in(from, self.pos))
        } else {
            None
        };
        Ok(self.mk(
            ExprKind::New {
                type_text: base,
                outer: outer.map(Box::new),
                args,
                body,
            },
            start,
        ))
    }
}

#[derive(Default)]
struct Modifiers {
    is_static: bool,
}
