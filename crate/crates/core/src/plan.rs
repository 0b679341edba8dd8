//! Extract Method planning: the new method's signature and text, and the
//! text edits that insert it and replace the fragment and its exact
//! duplicates with calls.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::clone::{normalize, DuplicateMatch};
use crate::error::Error;
use crate::miner::{is_extractable, Candidate, ScoreWeights};
use crate::syntax::liveness::{events_in, Access};
use crate::syntax::{
    lexer::is_reserved, locate_fragment, methods_of, CodeFragment, ForInit, MethodDecl, Span,
    Stmt, StmtKind, SyntaxTree, Token, TokenKind, VariableFlow,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextEdit {
    pub path: String,
    pub span: Span,
    pub new_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanParam {
    pub name: String,
    pub type_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionPlan {
    pub name: String,
    pub params: Vec<PlanParam>,
    /// The single live-out variable, if any.
    pub returns: Option<PlanParam>,
    pub method_text: String,
    /// Edits in descending span order, ready to apply one by one.
    pub edits: Vec<TextEdit>,
    /// Duplicate methods in which an occurrence was replaced by a call.
    pub replaced: Vec<String>,
    /// Matches that are listed but left untouched.
    pub reported_only: Vec<DuplicateMatch>,
}

pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_' || c == '$')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
        && !is_reserved(name)
        && !matches!(name, "true" | "false" | "null" | "_")
}

/// Declared type of each variable in the method, taking for every name the
/// last declaration that starts before `before` (parameters first).
fn declared_types(method: &MethodDecl, before: usize) -> BTreeMap<String, String> {
    let mut decls: Vec<(usize, String, String)> = Vec::new();
    let with_dims = |t: &str, dims: u32| format!("{t}{}", "[]".repeat(dims as usize));
    for s in &method.body.stmts {
        s.walk(&mut |st| match &st.kind {
            StmtKind::LocalVar { type_text, declarators }
            | StmtKind::For {
                init: Some(ForInit::Decl { type_text, declarators }),
                ..
            } => {
                for d in declarators {
                    decls.push((d.offset, d.name.clone(), with_dims(type_text, d.dims)));
                }
            }
            StmtKind::ForEach { type_text, var, .. } => {
                decls.push((var.offset, var.name.clone(), with_dims(type_text, var.dims)))
            }
            StmtKind::Try { resources, catches, .. } => {
                for (t, d) in resources.iter().filter_map(|r| r.decl.as_ref()) {
                    decls.push((d.offset, d.name.clone(), t.clone()));
                }
                for c in catches {
                    decls.push((c.offset, c.name.clone(), c.type_text.clone()));
                }
            }
            _ => {}
        });
    }
    decls.sort();
    let mut types: BTreeMap<String, String> = method
        .params
        .iter()
        .map(|p| (p.name.clone(), p.type_text.replace("...", "[]")))
        .collect();
    for (off, name, t) in decls {
        if off < before {
            types.insert(name, t);
        }
    }
    types
}

fn resolve(types: &BTreeMap<String, String>, name: &str) -> Result<String, Error> {
    match types.get(name) {
        Some(t) if t != "var" => Ok(t.clone()),
        Some(_) => Err(Error::Plan(format!("type of `{name}` is inferred (`var`) and cannot be named"))),
        None => Err(Error::Plan(format!("cannot resolve the declared type of `{name}`"))),
    }
}

fn line_start(src: &str, offset: usize) -> usize {
    src[..offset].rfind('\n').map_or(0, |i| i + 1)
}

fn indentation(src: &str, offset: usize) -> &str {
    let start = line_start(src, offset);
    let line = &src[start..];
    &line[..line.len() - line.trim_start_matches([' ', '\t']).len()]
}

/// Fragment text with its common indentation replaced by `indent`.
fn reindent(src: &str, span: Span, indent: &str) -> String {
    let from = line_start(src, span.start);
    let lead = &src[from..span.start];
    let text = if lead.trim().is_empty() {
        &src[from..span.end]
    } else {
        &src[span.start..span.end]
    };
    let lines: Vec<&str> = text.lines().collect();
    let common = lines
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start_matches([' ', '\t']).len())
        .min()
        .unwrap_or(0);
    lines
        .iter()
        .map(|l| {
            if l.trim().is_empty() {
                String::new()
            } else {
                format!("{indent}{}", &l[common.min(l.len() - l.trim_start_matches([' ', '\t']).len())..])
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

struct CallSite {
    args: Vec<String>,
    /// (name, type, declared inside the fragment)
    result: Option<(String, String, bool)>,
    /// Fragment-local declarations that later code still names.
    hoisted: Vec<(String, String)>,
}

impl CallSite {
    fn render(&self, name: &str) -> String {
        let call = format!("{name}({})", self.args.join(", "));
        let mut out: Vec<String> = self.hoisted.iter().map(|(n, t)| format!("{t} {n};")).collect();
        out.push(match &self.result {
            Some((v, t, true)) => format!("{t} {v} = {call};"),
            Some((v, _, false)) => format!("{v} = {call};"),
            None => format!("{call};"),
        });
        out.join(" ")
    }
}

/// Names declared by the top-level statements of the fragment.
fn top_level_declarations(stmts: &[Stmt]) -> Vec<String> {
    stmts
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::LocalVar { declarators, .. } => Some(declarators.iter().map(|d| d.name.clone())),
            _ => None,
        })
        .flatten()
        .collect()
}

fn call_site(fragment: &CodeFragment, method: &MethodDecl, flow: &VariableFlow, params: &[String]) -> Result<CallSite, Error> {
    let before = declared_types(method, fragment.span.start);
    let inside = declared_types(method, fragment.span.end);
    let result = match flow.live_out.iter().next() {
        Some(v) => {
            let declared_here = flow.declared_inside.contains(v) && !flow.outer_locals.contains(v);
            let t = if declared_here { resolve(&inside, v)? } else { resolve(&before, v)? };
            Some((v.clone(), t, declared_here))
        }
        None => None,
    };
    let later: BTreeSet<String> = events_in(&method.body.stmts)
        .into_iter()
        .filter(|e| e.offset >= fragment.span.end && e.access != Access::Declare)
        .map(|e| e.name)
        .collect();
    let mut hoisted = Vec::new();
    for n in top_level_declarations(&fragment.statements) {
        if later.contains(&n) && !flow.live_out.contains(&n) && !flow.outer_locals.contains(&n) {
            hoisted.push((n.clone(), resolve(&inside, &n)?));
        }
    }
    Ok(CallSite {
        args: params.to_vec(),
        result,
        hoisted,
    })
}

/// Position-wise identifier mapping from `a` to `b`, if consistent both ways.
fn identifier_mapping(a: &[Token], b: &[Token]) -> Option<BTreeMap<String, String>> {
    let mut fwd: BTreeMap<String, String> = BTreeMap::new();
    let mut back: BTreeMap<String, String> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        match (x.kind, y.kind) {
            (TokenKind::Identifier, TokenKind::Identifier) => {
                if fwd.entry(x.text.clone()).or_insert_with(|| y.text.clone()) != &y.text
                    || back.entry(y.text.clone()).or_insert_with(|| x.text.clone()) != &x.text
                {
                    return None;
                }
            }
            _ if x.kind.is_literal() && x.text != y.text => return None,
            _ => {}
        }
    }
    Some(fwd)
}

/// Non-overlapping occurrences of `pattern` in the method body, skipping
/// any that overlap `skip`.
fn occurrences(method: &MethodDecl, pattern: &[Token], skip: Span) -> Vec<Span> {
    let want = normalize(pattern);
    let body = &method.body_tokens;
    let norm = normalize(body);
    let n = want.len();
    let mut out = Vec::new();
    let mut i = 0;
    while n > 0 && i + n <= norm.len() {
        if norm.0[i..i + n] == want.0[..] {
            let span = Span::new(body[i].span.start, body[i + n - 1].span.end);
            if !span.overlaps(skip) {
                out.push(span);
                i += n;
                continue;
            }
        }
        i += 1;
    }
    out
}

struct Replacement {
    span: Span,
    call: String,
}

/// Tries to turn an exact duplicate occurrence into a call with its own
/// arguments. `None` means the occurrence can only be reported.
#[allow(clippy::too_many_arguments)]
fn replace_occurrence(
    tree: &SyntaxTree,
    at: Span,
    origin: &CodeFragment,
    origin_method: &MethodDecl,
    origin_flow: &VariableFlow,
    params: &[PlanParam],
    returns: &Option<PlanParam>,
    new_is_static: bool,
    name: &str,
) -> Option<Replacement> {
    let (m, occ) = locate_fragment(tree, at)?;
    if m.owner != origin_method.owner || (m.is_static && !new_is_static) {
        return None;
    }
    let c = Candidate::measure(occ.clone(), m, &ScoreWeights::default()).ok()?;
    if !is_extractable(&c) {
        return None;
    }
    let map = identifier_mapping(&origin.tokens, &occ.tokens)?;
    let origin_vars: BTreeSet<&String> = origin_flow
        .outer_locals
        .iter()
        .chain(&origin_flow.declared_inside)
        .collect();
    if map.iter().any(|(a, b)| a != b && !origin_vars.contains(a)) {
        return None;
    }
    let flow = &c.flow;
    let types = declared_types(m, occ.span.start);
    let mut args = Vec::new();
    for p in params {
        let arg = map.get(&p.name)?;
        if resolve(&types, arg).ok()? != p.type_text {
            return None;
        }
        args.push(arg.clone());
    }
    let mapped_out: BTreeSet<String> = origin_flow
        .live_out
        .iter()
        .filter_map(|v| map.get(v).cloned())
        .collect();
    if flow.live_out != mapped_out {
        return None;
    }
    let site = call_site(&occ, m, flow, &args).ok()?;
    if let (Some((_, t, _)), Some(r)) = (&site.result, returns) {
        if *t != r.type_text {
            return None;
        }
    }
    Some(Replacement {
        span: occ.span,
        call: site.render(name),
    })
}

/// Plans the extraction of `fragment` out of `method` into a new method
/// called `name`, also replacing exact duplicates where that is safe.
pub fn plan_extraction(
    tree: &SyntaxTree,
    fragment: &CodeFragment,
    method: &MethodDecl,
    name: &str,
    duplicates: &[DuplicateMatch],
) -> Result<ExtractionPlan, Error> {
    if !is_valid_identifier(name) {
        return Err(Error::Plan(format!("`{name}` is not a valid method name")));
    }
    let cand = Candidate::measure(fragment.clone(), method, &ScoreWeights::default())?;
    let flow = &cand.flow;
    if flow.live_out.len() > 1 {
        return Err(Error::Contract(format!(
            "fragment has {} live-out variables",
            flow.live_out.len()
        )));
    }
    if !is_extractable(&cand) {
        return Err(Error::Contract("fragment is not extractable".into()));
    }

    let types = declared_types(method, fragment.span.start);
    let param_names: Vec<String> = flow
        .live_in
        .iter()
        .filter(|v| !flow.fields.contains(*v))
        .cloned()
        .collect();
    let params = param_names
        .iter()
        .map(|n| {
            Ok(PlanParam {
                name: n.clone(),
                type_text: resolve(&types, n)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let owner_clash = methods_of(tree)
        .into_iter()
        .any(|m| m.owner == method.owner && m.name == name && m.params.len() == params.len());
    if owner_clash {
        return Err(Error::Plan(format!(
            "`{}` already declares `{name}` with {} parameters",
            method.owner,
            params.len()
        )));
    }

    let site = call_site(fragment, method, flow, &param_names)?;
    let returns = site.result.as_ref().map(|(v, t, _)| PlanParam {
        name: v.clone(),
        type_text: t.clone(),
    });

    let src = &tree.source;
    let indent = indentation(src, method.span.start).to_string();
    let body_indent = format!("{indent}    ");
    let mut header = indent.clone();
    if method.is_static {
        header.push_str("static ");
    }
    if let Some(tp) = &method.type_params {
        header.push_str(tp);
        header.push(' ');
    }
    header.push_str(returns.as_ref().map_or("void", |r| r.type_text.as_str()));
    header.push(' ');
    header.push_str(name);
    header.push('(');
    header.push_str(
        &params
            .iter()
            .map(|p| format!("{} {}", p.type_text, p.name))
            .collect::<Vec<_>>()
            .join(", "),
    );
    header.push(')');
    if let Some(t) = &method.throws {
        header.push_str(" throws ");
        header.push_str(t);
    }
    let mut method_text = format!("{header} {{\n{}\n", reindent(src, fragment.span, &body_indent));
    if let Some(r) = &returns {
        method_text.push_str(&format!("{body_indent}return {};\n", r.name));
    }
    method_text.push_str(&format!("{indent}}}"));

    let mut edits = vec![
        TextEdit {
            path: tree.path.clone(),
            span: Span::new(method.span.end, method.span.end),
            new_text: format!("\n\n{method_text}"),
        },
        TextEdit {
            path: tree.path.clone(),
            span: fragment.span,
            new_text: site.render(name),
        },
    ];

    let mut replaced = Vec::new();
    let mut reported_only = Vec::new();
    let methods = methods_of(tree);
    for d in duplicates {
        let target = methods.iter().find(|m| m.span == d.span);
        let mut done = false;
        if let (true, Some(m)) = (d.exact, target) {
            for at in occurrences(m, &fragment.tokens, fragment.span) {
                if let Some(r) = replace_occurrence(
                    tree, at, fragment, method, flow, &params, &returns, method.is_static, name,
                ) {
                    edits.push(TextEdit {
                        path: tree.path.clone(),
                        span: r.span,
                        new_text: r.call,
                    });
                    done = true;
                }
            }
        }
        if done {
            replaced.push(d.method.clone());
        } else {
            reported_only.push(d.clone());
        }
    }
    edits.sort_by(|a, b| b.span.start.cmp(&a.span.start).then(b.span.end.cmp(&a.span.end)));

    Ok(ExtractionPlan {
        name: name.to_string(),
        params,
        returns,
        method_text,
        edits,
        replaced,
        reported_only,
    })
}

/// Applies non-overlapping edits to `source`.
pub fn apply_edits(source: &str, edits: &[TextEdit]) -> Result<String, Error> {
    let mut sorted: Vec<&TextEdit> = edits.iter().collect();
    sorted.sort_by(|a, b| b.span.start.cmp(&a.span.start).then(b.span.end.cmp(&a.span.end)));
    let mut out = source.to_string();
    let mut limit = source.len();
    for e in sorted {
        if e.span.end > limit || e.span.start > e.span.end {
            return Err(Error::Plan(format!("edit {:?} overlaps another edit", e.span)));
        }
        if !source.is_char_boundary(e.span.start) || !source.is_char_boundary(e.span.end) {
            return Err(Error::Plan(format!("edit {:?} splits a character", e.span)));
        }
        out.replace_range(e.span.start..e.span.end, &e.new_text);
        limit = e.span.start;
    }
    Ok(out)
}
