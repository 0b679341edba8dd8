//! Naive dataflow oracle: builds an explicit control-flow graph from the
//! statement tree and solves live-in (forward must-definition) and
//! live-out (backward may-liveness) by round-robin iteration to a fixpoint.
//! Only the per-expression event extraction is shared with the library.

use std::collections::BTreeSet;

use pastewatch_core::syntax::liveness::{
    declarator_events, expr_events, for_init_events, resource_events, simple_stmt_events, Access,
    Event,
};
use pastewatch_core::syntax::{
    count_statements, methods_of, Block, BlockId, CodeFragment, MethodDecl, Stmt, StmtKind,
    SyntaxTree, VariableFlow,
};

type Names = BTreeSet<String>;

#[derive(Default)]
struct Cfg {
    events: Vec<Vec<Event>>,
    succ: Vec<Vec<usize>>,
    /// Marker node placed at a block boundary: (block, statement index).
    marker_at: Option<(BlockId, usize)>,
    marker: Option<usize>,
}

impl Cfg {
    fn node(&mut self, events: Vec<Event>) -> usize {
        self.events.push(events);
        self.succ.push(Vec::new());
        self.events.len() - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        if !self.succ[a].contains(&b) {
            self.succ[a].push(b);
        }
    }

    fn chain(&mut self, from: usize, events: Vec<Event>) -> usize {
        let n = self.node(events);
        self.edge(from, n);
        n
    }

    fn seq(&mut self, block_id: Option<BlockId>, stmts: &[Stmt], entry: usize) -> usize {
        let mut cur = entry;
        for (i, s) in stmts.iter().enumerate() {
            cur = self.stmt(s, cur);
            if block_id.is_some() && block_id.zip(Some(i + 1)) == self.marker_at {
                let m = self.chain(cur, Vec::new());
                self.marker = Some(m);
                cur = m;
            }
        }
        cur
    }

    fn block(&mut self, b: &Block, entry: usize) -> usize {
        self.seq(Some(b.id), &b.stmts, entry)
    }

    /// Region that may be skipped entirely.
    fn optional(&mut self, b: &Block, entry: usize) -> usize {
        let exit = self.block(b, entry);
        let join = self.node(Vec::new());
        self.edge(entry, join);
        self.edge(exit, join);
        join
    }

    fn stmt(&mut self, s: &Stmt, entry: usize) -> usize {
        match &s.kind {
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.chain(entry, expr_events(cond));
                let join = self.node(Vec::new());
                self.edge(c, join);
                let t = self.block(then_branch, c);
                self.edge(t, join);
                if let Some(e) = else_branch {
                    let e = self.block(e, c);
                    self.edge(e, join);
                }
                join
            }
            StmtKind::While { cond, body } => {
                let c = self.chain(entry, expr_events(cond));
                let j = self.optional(body, c);
                self.edge(j, c);
                self.chain(j, Vec::new())
            }
            StmtKind::DoWhile { body, cond } => {
                let start = self.chain(entry, Vec::new());
                let j = self.optional(body, start);
                let c = self.chain(j, expr_events(cond));
                self.edge(c, start);
                self.chain(c, Vec::new())
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                let i = self.chain(entry, for_init_events(init));
                let c = self.chain(i, cond.as_ref().map(expr_events).unwrap_or_default());
                let b = self.block(body, c);
                let u = self.chain(b, update.iter().flat_map(expr_events).collect());
                let j = self.node(Vec::new());
                self.edge(u, j);
                self.edge(c, j);
                self.edge(j, c);
                self.chain(j, Vec::new())
            }
            StmtKind::ForEach {
                var,
                iterable,
                body,
                ..
            } => {
                let it = self.chain(entry, expr_events(iterable));
                let start = self.chain(it, Vec::new());
                let d = self.chain(start, declarator_events(std::slice::from_ref(var)));
                let b = self.block(body, d);
                let j = self.node(Vec::new());
                self.edge(b, j);
                self.edge(start, j);
                self.edge(j, start);
                self.chain(j, Vec::new())
            }
            StmtKind::Switch { selector, cases } => {
                let sel = self.chain(entry, expr_events(selector));
                let join = self.node(Vec::new());
                self.edge(sel, join);
                for c in cases {
                    let e = self.block(&c.body, sel);
                    self.edge(e, join);
                }
                join
            }
            StmtKind::Try {
                resources,
                body,
                catches,
                finally,
            } => {
                let r = self.chain(entry, resource_events(resources));
                let join = self.node(Vec::new());
                self.edge(r, join);
                let b = self.block(body, r);
                self.edge(b, join);
                for c in catches {
                    let d = self.chain(r, vec![decl(&c.name, c.offset)]);
                    let e = self.block(&c.body, d);
                    self.edge(e, join);
                }
                match finally {
                    Some(f) => self.optional(f, join),
                    None => join,
                }
            }
            StmtKind::Synchronized { lock, body } => {
                let l = self.chain(entry, expr_events(lock));
                self.optional(body, l)
            }
            StmtKind::Block(b) => self.optional(b, entry),
            _ => self.chain(entry, simple_stmt_events(s)),
        }
    }

    fn preds(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.events.len()];
        for (a, ss) in self.succ.iter().enumerate() {
            for &b in ss {
                p[b].push(a);
            }
        }
        p
    }
}

fn decl(name: &str, offset: usize) -> Event {
    Event {
        access: Access::Declare,
        name: name.to_string(),
        offset,
        conditional: false,
    }
}

fn kills(e: &Event) -> bool {
    e.access != Access::Read && !e.conditional
}

fn all_events(cfg: &Cfg) -> impl Iterator<Item = &Event> {
    cfg.events.iter().flatten()
}

/// Names read somewhere in `stmts` on a path from their entry that has no
/// unconditional write to the name.
fn upward_exposed(stmts: &[Stmt]) -> Vec<String> {
    let mut cfg = Cfg::default();
    let entry = cfg.node(Vec::new());
    cfg.seq(None, stmts, entry);
    let n = cfg.events.len();
    let universe: Names = all_events(&cfg).map(|e| e.name.clone()).collect();
    let preds = cfg.preds();
    let mut out: Vec<Names> = vec![universe; n];
    out[entry] = Names::new();
    let transfer = |i: usize, mut set: Names| {
        for e in &cfg.events[i] {
            if kills(e) {
                set.insert(e.name.clone());
            }
        }
        set
    };
    let in_of = |i: usize, out: &Vec<Names>| -> Names {
        let mut it = preds[i].iter();
        match it.next() {
            None => Names::new(),
            Some(&first) => it.fold(out[first].clone(), |acc, &p| {
                acc.intersection(&out[p]).cloned().collect()
            }),
        }
    };
    loop {
        let mut changed = false;
        for i in 0..n {
            let next = transfer(i, in_of(i, &out));
            if next != out[i] {
                out[i] = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut exposed: Vec<(usize, String)> = Vec::new();
    for i in 0..n {
        let mut defined = in_of(i, &out);
        for e in &cfg.events[i] {
            if e.access == Access::Read && !defined.contains(&e.name) {
                exposed.push((e.offset, e.name.clone()));
            }
            if kills(e) {
                defined.insert(e.name.clone());
            }
        }
    }
    exposed.sort();
    let mut names = Vec::new();
    for (_, name) in exposed {
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names
}

/// Live set at the boundary after statement `index - 1` of `block`.
fn live_at(method: &MethodDecl, block: BlockId, index: usize) -> Names {
    let mut cfg = Cfg {
        marker_at: Some((block, index)),
        ..Cfg::default()
    };
    let entry = cfg.node(Vec::new());
    cfg.block(&method.body, entry);
    let marker = cfg.marker.expect("boundary not found");
    let n = cfg.events.len();
    let mut live_in: Vec<Names> = vec![Names::new(); n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let mut live: Names = cfg.succ[i].iter().flat_map(|&s| live_in[s].iter().cloned()).collect();
            for e in cfg.events[i].iter().rev() {
                if e.access == Access::Read {
                    live.insert(e.name.clone());
                } else if kills(e) {
                    live.remove(&e.name);
                }
            }
            if live != live_in[i] {
                live_in[i] = live;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    live_in[marker].clone()
}

pub struct OracleFlow {
    pub live_in: Names,
    /// Live-in in order of first textual read.
    pub live_in_order: Vec<String>,
    pub live_out: Names,
    pub declared_inside: Names,
    pub written_inside: Names,
}

/// Reference live-in/live-out for a located fragment.
pub fn oracle_flow(fragment: &CodeFragment, method: &MethodDecl) -> OracleFlow {
    let loc = fragment.location.expect("located fragment");
    let inside = |off: usize| fragment.span.start <= off && off < fragment.span.end;

    let mut whole = Cfg::default();
    let e = whole.node(Vec::new());
    whole.block(&method.body, e);
    let declares: Vec<&Event> = all_events(&whole).filter(|e| e.access == Access::Declare).collect();
    let declared_inside: Names = declares.iter().filter(|e| inside(e.offset)).map(|e| e.name.clone()).collect();
    let mut outside: Names = method.params.iter().map(|p| p.name.clone()).collect();
    outside.extend(declares.iter().filter(|e| !inside(e.offset)).map(|e| e.name.clone()));
    let locals: Names = outside.union(&declared_inside).cloned().collect();
    let fields: Names = method
        .visible_fields
        .iter()
        .map(|f| f.name.clone())
        .filter(|f| !locals.contains(f))
        .collect();

    let live_in_order: Vec<String> = upward_exposed(&fragment.statements)
        .into_iter()
        .filter(|n| !declared_inside.contains(n) && (outside.contains(n) || fields.contains(n)))
        .collect();

    let mut frag_cfg = Cfg::default();
    let fe = frag_cfg.node(Vec::new());
    frag_cfg.seq(None, &fragment.statements, fe);
    let written_inside: Names = all_events(&frag_cfg)
        .filter(|e| e.access != Access::Read)
        .map(|e| e.name.clone())
        .collect();

    let live_out = live_at(method, loc.block, loc.start + loc.len)
        .into_iter()
        .filter(|n| written_inside.contains(n) && locals.contains(n))
        .collect();

    OracleFlow {
        live_in: live_in_order.iter().cloned().collect(),
        live_in_order,
        live_out,
        declared_inside,
        written_inside,
    }
}

/// Runs the dataflow oracle over every statement run of every fixture
/// method with at most 25 statements. Returns the number of runs checked.
pub fn check_oracle_suite(trees: &[SyntaxTree]) -> Result<usize, String> {
    let mut checked = 0;
    let mut failure = None;
    for t in trees {
        for m in methods_of(t) {
            if count_statements(&m.body.stmts) > 25 {
                continue;
            }
            m.body.walk_blocks(&mut |b| {
                for start in 0..b.stmts.len() {
                    for len in 1..=b.stmts.len() - start {
                        if failure.is_some() {
                            return;
                        }
                        let fr = CodeFragment::from_run(t, b, start, len);
                        let ctx = format!("{}::{} `{}`", t.path, m.name, fr.text);
                        let ours = match VariableFlow::analyze(&fr, m) {
                            Ok(f) => f,
                            Err(e) => {
                                failure = Some(format!("{ctx}: {e}"));
                                return;
                            }
                        };
                        let oracle = oracle_flow(&fr, m);
                        if ours.live_in != oracle.live_in_order {
                            failure = Some(format!("live_in {ctx}: {:?} vs {:?}", ours.live_in, oracle.live_in_order));
                        } else if ours.live_out != oracle.live_out {
                            failure = Some(format!("live_out {ctx}: {:?} vs {:?}", ours.live_out, oracle.live_out));
                        }
                        checked += 1;
                    }
                }
            });
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(checked),
    }
}

/// Methods with at most 25 statements in the fixture corpus.
pub fn small_method_count(trees: &[SyntaxTree]) -> usize {
    trees
        .iter()
        .flat_map(methods_of)
        .filter(|m| count_statements(&m.body.stmts) <= 25)
        .count()
}
