//! Syntactic variable flow for statement fragments.
//!
//! Every statement is reduced to ordered variable events. Header
//! expressions (conditions, selectors, initializers) run at the statement's
//! own level; every nested block is optional, so an assignment only kills a
//! later read when it precedes it at the same or a shallower level of the
//! same block chain. Loops add a back edge from the end of their repeated
//! part to its start. `break`, `continue`, `return` and `throw` fall through.
//!
//! `this.x` is treated as the variable `x`. Reads inside lambda and
//! anonymous class bodies count as reads; writes there are ignored.

use std::collections::{BTreeSet, HashSet};

use crate::error::Error;
use crate::syntax::ast::*;
use crate::syntax::fragment::CodeFragment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    Read,
    Assign,
    Declare,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub access: Access,
    pub name: String,
    /// Byte offset of the name token.
    pub offset: usize,
    /// Set for writes under `?:`, `&&` or `||`; those never kill.
    pub conditional: bool,
}

impl Event {
    pub fn kills(&self) -> bool {
        self.access != Access::Read && !self.conditional
    }

    fn read(name: &str, offset: usize) -> Self {
        Self {
            access: Access::Read,
            name: name.to_string(),
            offset,
            conditional: false,
        }
    }

    pub fn declare(name: &str, offset: usize) -> Self {
        Self {
            access: Access::Declare,
            name: name.to_string(),
            offset,
            conditional: false,
        }
    }
}

/// Events of an expression in evaluation order.
pub fn expr_events(e: &Expr) -> Vec<Event> {
    let mut out = Vec::new();
    push_expr(e, false, &mut out);
    out
}

fn write(name: &str, offset: usize, access: Access, cond: bool, out: &mut Vec<Event>) {
    out.push(Event {
        access,
        name: name.to_string(),
        offset,
        conditional: cond,
    });
}

fn push_expr(e: &Expr, cond: bool, out: &mut Vec<Event>) {
    match &e.kind {
        ExprKind::Name(n) => out.push(Event::read(n, e.span.start)),
        ExprKind::Literal(_) | ExprKind::This | ExprKind::Super | ExprKind::ClassLit(_) => {}
        ExprKind::Field { target, .. } => match e.variable_name() {
            Some((n, off)) => out.push(Event::read(n, off)),
            None => push_expr(target, cond, out),
        },
        ExprKind::Call { target, args, .. } => {
            if let Some(t) = target {
                push_expr(t, cond, out);
            }
            for a in args {
                push_expr(a, cond, out);
            }
        }
        ExprKind::New {
            outer, args, body, ..
        } => {
            if let Some(o) = outer {
                push_expr(o, cond, out);
            }
            for a in args {
                push_expr(a, cond, out);
            }
            for n in body.iter().flatten() {
                out.push(Event::read(&n.name, n.offset));
            }
        }
        ExprKind::NewArray { dims, init, .. } => {
            for d in dims {
                push_expr(d, cond, out);
            }
            if let Some(i) = init {
                push_expr(i, cond, out);
            }
        }
        ExprKind::ArrayInit(items) => items.iter().for_each(|i| push_expr(i, cond, out)),
        ExprKind::Index { target, index } => {
            push_expr(target, cond, out);
            push_expr(index, cond, out);
        }
        ExprKind::Unary { op, operand, .. } => {
            let is_step = op == "++" || op == "--";
            match operand.variable_name() {
                Some((n, off)) if is_step => {
                    out.push(Event::read(n, off));
                    write(n, off, Access::Assign, cond, out);
                }
                _ => push_expr(operand, cond, out),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            push_expr(lhs, cond, out);
            push_expr(rhs, cond || op == "&&" || op == "||", out);
        }
        ExprKind::Assign { op, target, value } => match target.variable_name() {
            Some((n, off)) => {
                if op != "=" {
                    out.push(Event::read(n, off));
                }
                push_expr(value, cond, out);
                write(n, off, Access::Assign, cond, out);
            }
            None => {
                push_expr(target, cond, out);
                push_expr(value, cond, out);
            }
        },
        ExprKind::Conditional {
            cond: c,
            then_expr,
            else_expr,
        } => {
            push_expr(c, cond, out);
            push_expr(then_expr, true, out);
            push_expr(else_expr, true, out);
        }
        ExprKind::InstanceOf { expr, binding, .. } => {
            push_expr(expr, cond, out);
            if let Some((n, off)) = binding {
                write(n, *off, Access::Declare, cond, out);
            }
        }
        ExprKind::Cast { expr, .. } => push_expr(expr, cond, out),
        ExprKind::Lambda { params, body } => {
            let mut inner = Vec::new();
            match body {
                LambdaBody::Expr(b) => push_expr(b, true, &mut inner),
                LambdaBody::Block(b) => {
                    let mut events = Vec::new();
                    b.walk_blocks(&mut |blk| {
                        for s in &blk.stmts {
                            events.extend(own_events(s));
                        }
                    });
                    inner = events;
                }
            }
            let local: HashSet<&str> = params
                .iter()
                .map(String::as_str)
                .chain(
                    inner
                        .iter()
                        .filter(|ev| ev.access == Access::Declare)
                        .map(|ev| ev.name.as_str()),
                )
                .collect();
            out.extend(
                inner
                    .iter()
                    .filter(|ev| ev.access == Access::Read && !local.contains(ev.name.as_str()))
                    .cloned(),
            );
        }
        ExprKind::MethodRef { target, .. } => push_expr(target, cond, out),
        ExprKind::Opaque(names) => {
            for n in names {
                out.push(Event::read(&n.name, n.offset));
            }
        }
    }
}

pub fn declarator_events(ds: &[Declarator]) -> Vec<Event> {
    let mut out = Vec::new();
    for d in ds {
        if let Some(init) = &d.init {
            push_expr(init, false, &mut out);
        }
        out.push(Event::declare(&d.name, d.offset));
    }
    out
}

/// Events of a statement that has no nested blocks. Compound statements
/// yield an empty list; use [`header_events`] for their own expressions.
pub fn simple_stmt_events(s: &Stmt) -> Vec<Event> {
    match &s.kind {
        StmtKind::LocalVar { declarators, .. } => declarator_events(declarators),
        StmtKind::Expr(e) | StmtKind::Throw(e) | StmtKind::Yield(e) => expr_events(e),
        StmtKind::Return(Some(e)) => expr_events(e),
        StmtKind::Assert { cond, message } => {
            let mut v = expr_events(cond);
            if let Some(m) = message {
                v.extend(expr_events(m));
            }
            v
        }
        StmtKind::Opaque { reads } => reads.iter().map(|n| Event::read(&n.name, n.offset)).collect(),
        _ => Vec::new(),
    }
}

/// All events a statement produces at its own level or in its headers,
/// excluding events of nested statements.
pub fn own_events(s: &Stmt) -> Vec<Event> {
    let mut v = simple_stmt_events(s);
    v.extend(header_events(s));
    v
}

/// Events of a compound statement's header expressions, in textual order.
pub fn header_events(s: &Stmt) -> Vec<Event> {
    match &s.kind {
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } | StmtKind::DoWhile { cond, .. } => {
            expr_events(cond)
        }
        StmtKind::For {
            init, cond, update, ..
        } => {
            let mut v = for_init_events(init);
            if let Some(c) = cond {
                v.extend(expr_events(c));
            }
            for u in update {
                v.extend(expr_events(u));
            }
            v
        }
        StmtKind::ForEach { var, iterable, .. } => {
            let mut v = expr_events(iterable);
            v.push(Event::declare(&var.name, var.offset));
            v
        }
        StmtKind::Switch { selector, .. } => expr_events(selector),
        StmtKind::Try {
            resources, catches, ..
        } => {
            let mut v = resource_events(resources);
            v.extend(catches.iter().map(|c| Event::declare(&c.name, c.offset)));
            v
        }
        StmtKind::Synchronized { lock, .. } => expr_events(lock),
        _ => Vec::new(),
    }
}

pub fn for_init_events(init: &Option<ForInit>) -> Vec<Event> {
    match init {
        Some(ForInit::Decl { declarators, .. }) => declarator_events(declarators),
        Some(ForInit::Exprs(es)) => es.iter().flat_map(expr_events).collect(),
        None => Vec::new(),
    }
}

pub fn resource_events(resources: &[Resource]) -> Vec<Event> {
    let mut v = Vec::new();
    for r in resources {
        if let Some((_, d)) = &r.decl {
            v.extend(declarator_events(std::slice::from_ref(d)));
        }
        if let Some(e) = &r.expr {
            v.extend(expr_events(e));
        }
    }
    v
}

/// Every event in `stmts` and their nested statements.
pub fn events_in(stmts: &[Stmt]) -> Vec<Event> {
    let mut out = Vec::new();
    for s in stmts {
        s.walk(&mut |st| out.extend(own_events(st)));
    }
    out
}

type Names = BTreeSet<String>;

// ----- forward: reads not preceded by a dominating write ---------------

fn fwd_events(events: &[Event], defined: &mut HashSet<String>, reads: &mut Vec<Event>) {
    for ev in events {
        match ev.access {
            Access::Read => {
                if !defined.contains(&ev.name) {
                    reads.push(ev.clone());
                }
            }
            _ if ev.kills() => {
                defined.insert(ev.name.clone());
            }
            _ => {}
        }
    }
}

fn fwd_block(stmts: &[Stmt], defined: &mut HashSet<String>, reads: &mut Vec<Event>) {
    for s in stmts {
        fwd_stmt(s, defined, reads);
    }
}

fn fwd_optional(stmts: &[Stmt], defined: &HashSet<String>, reads: &mut Vec<Event>) {
    let mut local = defined.clone();
    fwd_block(stmts, &mut local, reads);
}

fn fwd_stmt(s: &Stmt, defined: &mut HashSet<String>, reads: &mut Vec<Event>) {
    match &s.kind {
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            fwd_events(&expr_events(cond), defined, reads);
            fwd_optional(&then_branch.stmts, defined, reads);
            if let Some(e) = else_branch {
                fwd_optional(&e.stmts, defined, reads);
            }
        }
        StmtKind::While { cond, body } => {
            fwd_events(&expr_events(cond), defined, reads);
            fwd_optional(&body.stmts, defined, reads);
        }
        StmtKind::DoWhile { body, cond } => {
            fwd_optional(&body.stmts, defined, reads);
            fwd_events(&expr_events(cond), defined, reads);
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            fwd_events(&for_init_events(init), defined, reads);
            if let Some(c) = cond {
                fwd_events(&expr_events(c), defined, reads);
            }
            let mut local = defined.clone();
            fwd_block(&body.stmts, &mut local, reads);
            for u in update {
                fwd_events(&expr_events(u), &mut local, reads);
            }
        }
        StmtKind::ForEach {
            var,
            iterable,
            body,
            ..
        } => {
            fwd_events(&expr_events(iterable), defined, reads);
            let mut local = defined.clone();
            local.insert(var.name.clone());
            fwd_block(&body.stmts, &mut local, reads);
        }
        StmtKind::Switch { selector, cases } => {
            fwd_events(&expr_events(selector), defined, reads);
            for c in cases {
                fwd_optional(&c.body.stmts, defined, reads);
            }
        }
        StmtKind::Try {
            resources,
            body,
            catches,
            finally,
        } => {
            fwd_events(&resource_events(resources), defined, reads);
            fwd_optional(&body.stmts, defined, reads);
            for c in catches {
                let mut local = defined.clone();
                local.insert(c.name.clone());
                fwd_block(&c.body.stmts, &mut local, reads);
            }
            if let Some(f) = finally {
                fwd_optional(&f.stmts, defined, reads);
            }
        }
        StmtKind::Synchronized { lock, body } => {
            fwd_events(&expr_events(lock), defined, reads);
            fwd_optional(&body.stmts, defined, reads);
        }
        StmtKind::Block(b) => fwd_optional(&b.stmts, defined, reads),
        _ => fwd_events(&simple_stmt_events(s), defined, reads),
    }
}

// ----- backward: may-liveness with a snapshot at one block boundary ----

struct Backward {
    /// Block and statement index whose preceding boundary is recorded.
    target: (BlockId, usize),
    snapshot: Option<Names>,
}

fn bwd_events(events: &[Event], mut live: Names) -> Names {
    for ev in events.iter().rev() {
        if ev.access == Access::Read {
            live.insert(ev.name.clone());
        } else if ev.kills() {
            live.remove(&ev.name);
        }
    }
    live
}

fn union(mut a: Names, b: Names) -> Names {
    a.extend(b);
    a
}

impl Backward {
    fn block(&mut self, b: &Block, after: Names) -> Names {
        let mut live = after;
        for (i, s) in b.stmts.iter().enumerate().rev() {
            if self.target == (b.id, i + 1) {
                self.snapshot = Some(live.clone());
            }
            live = self.stmt(s, live);
        }
        live
    }

    fn optional(&mut self, b: &Block, after: Names) -> Names {
        let inner = self.block(b, after.clone());
        union(after, inner)
    }

    /// Live set at the head of a loop whose repeated part is `body_fn`.
    fn looped(&mut self, after: &Names, mut body_fn: impl FnMut(&mut Self, Names) -> Names) -> Names {
        let mut head = Names::new();
        loop {
            let exit = union(head.clone(), after.clone());
            let next = body_fn(self, exit);
            if next == head {
                return head;
            }
            head = next;
        }
    }

    fn stmt(&mut self, s: &Stmt, after: Names) -> Names {
        match &s.kind {
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let mut live = union(after.clone(), self.block(then_branch, after.clone()));
                if let Some(e) = else_branch {
                    live = union(live, self.block(e, after));
                }
                bwd_events(&expr_events(cond), live)
            }
            StmtKind::While { cond, body } => {
                let cond_ev = expr_events(cond);
                self.looped(&after, |me, x| {
                    let inner = me.optional(body, x);
                    bwd_events(&cond_ev, inner)
                })
            }
            StmtKind::DoWhile { body, cond } => {
                let cond_ev = expr_events(cond);
                self.looped(&after, |me, x| {
                    let y = bwd_events(&cond_ev, x);
                    me.optional(body, y)
                })
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                let cond_ev = cond.as_ref().map(expr_events).unwrap_or_default();
                let update_ev: Vec<Event> = update.iter().flat_map(expr_events).collect();
                let head = self.looped(&after, |me, x| {
                    let u = bwd_events(&update_ev, x.clone());
                    let inner = union(x, me.block(body, u));
                    bwd_events(&cond_ev, inner)
                });
                bwd_events(&for_init_events(init), head)
            }
            StmtKind::ForEach {
                var,
                iterable,
                body,
                ..
            } => {
                let decl = [Event::declare(&var.name, var.offset)];
                let head = self.looped(&after, |me, x| {
                    let inner = bwd_events(&decl, me.block(body, x.clone()));
                    union(x, inner)
                });
                bwd_events(&expr_events(iterable), head)
            }
            StmtKind::Switch { selector, cases } => {
                let mut live = after.clone();
                for c in cases {
                    let inner = self.block(&c.body, after.clone());
                    live = union(live, inner);
                }
                bwd_events(&expr_events(selector), live)
            }
            StmtKind::Try {
                resources,
                body,
                catches,
                finally,
            } => {
                let after_f = match finally {
                    Some(f) => self.optional(f, after),
                    None => after,
                };
                let mut live = union(after_f.clone(), self.block(body, after_f.clone()));
                for c in catches {
                    let inner = self.block(&c.body, after_f.clone());
                    let inner = bwd_events(&[Event::declare(&c.name, c.offset)], inner);
                    live = union(live, inner);
                }
                bwd_events(&resource_events(resources), live)
            }
            StmtKind::Synchronized { lock, body } => {
                let live = self.optional(body, after);
                bwd_events(&expr_events(lock), live)
            }
            StmtKind::Block(b) => self.optional(b, after),
            _ => bwd_events(&simple_stmt_events(s), after),
        }
    }
}

// ----- public queries ---------------------------------------------------

/// Variable flow of a fragment relative to its enclosing method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableFlow {
    /// Live-in variables in textual order of first exposed read.
    pub live_in: Vec<String>,
    pub live_out: Names,
    /// Names declared inside the fragment.
    pub declared_inside: Names,
    /// Parameters and locals of the method declared outside the fragment.
    pub outer_locals: Names,
    /// Visible fields not shadowed by a local of the method.
    pub fields: Names,
    /// Occurrences of names that resolve to a declaration outside the fragment.
    pub external_refs: usize,
}

impl VariableFlow {
    pub fn analyze(fragment: &CodeFragment, method: &MethodDecl) -> Result<Self, Error> {
        let loc = fragment.location.filter(|_| fragment.is_within(method)).ok_or_else(|| {
            Error::Contract(format!(
                "fragment at {}..{} is not within method `{}`",
                fragment.span.start, fragment.span.end, method.name
            ))
        })?;

        let method_events = events_in(&method.body.stmts);
        let inside = |off: usize| fragment.span.start <= off && off < fragment.span.end;

        let declared_inside: Names = method_events
            .iter()
            .filter(|e| e.access == Access::Declare && inside(e.offset))
            .map(|e| e.name.clone())
            .collect();
        let mut outer_locals: Names = method.params.iter().map(|p| p.name.clone()).collect();
        outer_locals.extend(
            method_events
                .iter()
                .filter(|e| e.access == Access::Declare && !inside(e.offset))
                .map(|e| e.name.clone()),
        );
        let all_locals: Names = outer_locals.union(&declared_inside).cloned().collect();
        let fields: Names = method
            .visible_fields
            .iter()
            .map(|f| f.name.clone())
            .filter(|n| !all_locals.contains(n))
            .collect();
        let external = |n: &str| {
            !declared_inside.contains(n) && (outer_locals.contains(n) || fields.contains(n))
        };

        // live-in
        let mut reads = Vec::new();
        fwd_block(&fragment.statements, &mut HashSet::new(), &mut reads);
        reads.sort_by_key(|r| r.offset);
        let mut live_in: Vec<String> = Vec::new();
        for r in &reads {
            if external(&r.name) && !live_in.contains(&r.name) {
                live_in.push(r.name.clone());
            }
        }

        // live-out
        let mut bwd = Backward {
            target: (loc.block, loc.start + loc.len),
            snapshot: None,
        };
        bwd.block(&method.body, Names::new());
        let live_at_end = bwd.snapshot.unwrap_or_default();
        let fragment_events = events_in(&fragment.statements);
        let written: Names = fragment_events
            .iter()
            .filter(|e| e.access != Access::Read)
            .map(|e| e.name.clone())
            .collect();
        let live_out: Names = live_at_end
            .into_iter()
            .filter(|n| written.contains(n) && all_locals.contains(n))
            .collect();

        let external_refs = fragment_events
            .iter()
            .filter(|e| e.access != Access::Declare && external(&e.name))
            .map(|e| e.offset)
            .collect::<HashSet<_>>()
            .len();

        Ok(Self {
            live_in,
            live_out,
            declared_inside,
            outer_locals,
            fields,
            external_refs,
        })
    }
}

/// Variables declared outside the fragment that it reads before any
/// dominating fragment-local write.
pub fn live_in(fragment: &CodeFragment, method: &MethodDecl) -> Result<BTreeSet<String>, Error> {
    Ok(VariableFlow::analyze(fragment, method)?
        .live_in
        .into_iter()
        .collect())
}

/// Locals assigned or declared in the fragment that may be read after it.
pub fn live_out(fragment: &CodeFragment, method: &MethodDecl) -> Result<BTreeSet<String>, Error> {
    Ok(VariableFlow::analyze(fragment, method)?.live_out)
}

/// Number of distinct local variable declarations in a method body,
/// loop variables and resources included, catch parameters excluded.
pub fn local_variable_count(method: &MethodDecl) -> usize {
    let mut n = 0;
    for s in &method.body.stmts {
        s.walk(&mut |st| {
            n += match &st.kind {
                StmtKind::LocalVar { declarators, .. } => declarators.len(),
                StmtKind::For {
                    init: Some(ForInit::Decl { declarators, .. }),
                    ..
                } => declarators.len(),
                StmtKind::ForEach { .. } => 1,
                StmtKind::Try { resources, .. } => {
                    resources.iter().filter(|r| r.decl.is_some()).count()
                }
                _ => 0,
            }
        });
    }
    n
}
