//! Syntax tree for the supported Java subset.
//!
//! Statements keep their byte span and their nesting depth. Depth 0 is a
//! direct child of a method body (or of a fragment's top level), and every
//! nested block adds one. The single exception is an `else if`, whose inner
//! `if` keeps the depth of the chain it continues.

use serde::{Deserialize, Serialize};

use crate::syntax::lexer::{Token, TokenKind};
use crate::syntax::Span;

#[derive(Debug, Clone)]
pub struct SyntaxTree {
    pub path: String,
    pub source: String,
    /// Non-comment tokens of the whole file.
    pub tokens: Vec<Token>,
    pub types: Vec<TypeDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
    Record,
    Annotation,
}

#[derive(Debug, Clone)]
pub struct TypeDecl {
    pub name: String,
    pub kind: TypeKind,
    pub span: Span,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub types: Vec<TypeDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub type_text: String,
    pub is_static: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub type_text: String,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub name: String,
    /// Simple name of the type declaring this method.
    pub owner: String,
    pub params: Vec<Param>,
    /// `None` for constructors.
    pub return_type: Option<String>,
    pub type_params: Option<String>,
    pub throws: Option<String>,
    pub is_static: bool,
    pub span: Span,
    pub body: Block,
    /// Body tokens strictly between the braces.
    pub body_tokens: Vec<Token>,
    /// Fields of the owning type and its enclosing types, innermost first.
    pub visible_fields: Vec<FieldDecl>,
}

impl MethodDecl {
    pub fn find_block(&self, id: BlockId) -> Option<&Block> {
        self.body.find(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockId(pub u32);

#[derive(Debug, Clone)]
pub struct Block {
    pub id: BlockId,
    /// Braced blocks include the braces; an unbraced body spans its statement.
    pub span: Span,
    pub braced: bool,
    pub stmts: Vec<Stmt>,
}

impl Block {
    pub fn find(&self, id: BlockId) -> Option<&Block> {
        if self.id == id {
            return Some(self);
        }
        self.stmts.iter().find_map(|s| {
            s.child_blocks()
                .into_iter()
                .find_map(|b| b.find(id))
        })
    }

    /// Visits this block and every nested statement block (lambda bodies excluded).
    pub fn walk_blocks<'a>(&'a self, f: &mut impl FnMut(&'a Block)) {
        f(self);
        for s in &self.stmts {
            for b in s.child_blocks() {
                b.walk_blocks(f);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    /// Includes the label when one is present.
    pub span: Span,
    pub depth: u32,
    pub label: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Declarator {
    pub name: String,
    pub offset: usize,
    pub dims: u32,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone)]
pub enum ForInit {
    Decl {
        type_text: String,
        declarators: Vec<Declarator>,
    },
    Exprs(Vec<Expr>),
}

#[derive(Debug, Clone)]
pub struct SwitchCase {
    /// Empty for `default`.
    pub labels: Vec<Expr>,
    pub body: Block,
}

#[derive(Debug, Clone)]
pub struct Resource {
    /// `None` when the resource is an existing variable or expression.
    pub decl: Option<(String, Declarator)>,
    pub expr: Option<Expr>,
}

#[derive(Debug, Clone)]
pub struct CatchClause {
    pub type_text: String,
    pub name: String,
    pub offset: usize,
    pub body: Block,
}

/// A simple name occurring inside a construct the parser keeps opaque.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameRef {
    pub name: String,
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Empty,
    LocalVar {
        type_text: String,
        declarators: Vec<Declarator>,
    },
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Block,
        else_branch: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    DoWhile {
        body: Block,
        cond: Expr,
    },
    For {
        init: Option<ForInit>,
        cond: Option<Expr>,
        update: Vec<Expr>,
        body: Block,
    },
    ForEach {
        type_text: String,
        var: Declarator,
        iterable: Expr,
        body: Block,
    },
    Switch {
        selector: Expr,
        cases: Vec<SwitchCase>,
    },
    Try {
        resources: Vec<Resource>,
        body: Block,
        catches: Vec<CatchClause>,
        finally: Option<Block>,
    },
    Return(Option<Expr>),
    Throw(Expr),
    Break(Option<String>),
    Continue(Option<String>),
    Yield(Expr),
    Synchronized {
        lock: Expr,
        body: Block,
    },
    Assert {
        cond: Expr,
        message: Option<Expr>,
    },
    Block(Block),
    /// Local type declarations and anything the parser could not structure.
    Opaque {
        reads: Vec<NameRef>,
    },
}

impl Stmt {
    /// Nested statement blocks in source order.
    pub fn child_blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut v = vec![then_branch];
                v.extend(else_branch);
                v
            }
            StmtKind::While { body, .. }
            | StmtKind::DoWhile { body, .. }
            | StmtKind::For { body, .. }
            | StmtKind::ForEach { body, .. }
            | StmtKind::Synchronized { body, .. } => vec![body],
            StmtKind::Block(b) => vec![b],
            StmtKind::Switch { cases, .. } => cases.iter().map(|c| &c.body).collect(),
            StmtKind::Try {
                body,
                catches,
                finally,
                ..
            } => {
                let mut v = vec![body];
                v.extend(catches.iter().map(|c| &c.body));
                v.extend(finally);
                v
            }
            _ => Vec::new(),
        }
    }

    /// Child statements in source order.
    pub fn children(&self) -> impl Iterator<Item = &Stmt> {
        self.child_blocks().into_iter().flat_map(|b| b.stmts.iter())
    }

    /// Number of statements in this subtree, this one included.
    pub fn count(&self) -> usize {
        1 + self.children().map(Stmt::count).sum::<usize>()
    }

    /// Largest depth found in this subtree.
    pub fn max_depth(&self) -> u32 {
        self.children()
            .map(Stmt::max_depth)
            .fold(self.depth, u32::max)
    }

    pub fn is_loop(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::While { .. }
                | StmtKind::DoWhile { .. }
                | StmtKind::For { .. }
                | StmtKind::ForEach { .. }
        )
    }

    /// Visits this statement and all nested ones in preorder.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

pub fn count_statements(stmts: &[Stmt]) -> usize {
    stmts.iter().map(Stmt::count).sum()
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum LambdaBody {
    Expr(Box<Expr>),
    Block(Block),
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Name(String),
    Literal(TokenKind),
    This,
    Super,
    Field {
        target: Box<Expr>,
        name: String,
    },
    /// `this(...)` and `super(...)` appear with those names and no target.
    Call {
        target: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
    },
    New {
        type_text: String,
        outer: Option<Box<Expr>>,
        args: Vec<Expr>,
        /// Names read inside an anonymous class body.
        body: Option<Vec<NameRef>>,
    },
    NewArray {
        type_text: String,
        dims: Vec<Expr>,
        init: Option<Box<Expr>>,
    },
    ArrayInit(Vec<Expr>),
    Index {
        target: Box<Expr>,
        index: Box<Expr>,
    },
    Unary {
        op: String,
        operand: Box<Expr>,
        postfix: bool,
    },
    Binary {
        op: String,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Assign {
        op: String,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Conditional {
        cond: Box<Expr>,
        then_expr: Box<Expr>,
        else_expr: Box<Expr>,
    },
    InstanceOf {
        expr: Box<Expr>,
        type_text: String,
        binding: Option<(String, usize)>,
    },
    Cast {
        type_text: String,
        expr: Box<Expr>,
    },
    Lambda {
        params: Vec<String>,
        body: LambdaBody,
    },
    MethodRef {
        target: Box<Expr>,
        name: String,
    },
    ClassLit(String),
    /// Switch expressions and other constructs kept as a bag of names.
    Opaque(Vec<NameRef>),
}

impl Expr {
    /// Whether this expression may stand alone as an expression statement.
    pub fn is_statement_expression(&self) -> bool {
        match &self.kind {
            ExprKind::Assign { .. } | ExprKind::Call { .. } | ExprKind::New { .. } => true,
            ExprKind::Unary { op, .. } => op == "++" || op == "--",
            ExprKind::Opaque(_) => true,
            _ => false,
        }
    }

    /// Variable name denoted by this expression when it is a simple name or
    /// `this.name`.
    pub fn variable_name(&self) -> Option<(&str, usize)> {
        match &self.kind {
            ExprKind::Name(n) => Some((n, self.span.start)),
            ExprKind::Field { target, name } if matches!(target.kind, ExprKind::This) => {
                Some((name, self.span.end - name.len()))
            }
            _ => None,
        }
    }
}
