//! The live pipeline: pastes wait in a queue until their due time, then are
//! validated, searched for duplicates, classified and possibly recommended.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use super::config::EngineConfig;
use super::protocol::{span_to_wire, utf16_to_byte, ClientMessage, EngineMessage, WireDuplicate, WireEdit};
use crate::clone::find_duplicates;
use crate::learn::Model;
use crate::metrics::extract_with_flow;
use crate::miner::{is_extractable, Candidate, ScoreWeights};
use crate::plan::plan_extraction;
use crate::syntax::{locate_fragment, parse_file, parse_fragment, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pending,
    Accepted,
    Dismissed,
    Expired,
}

#[derive(Debug, Clone)]
struct PasteEvent {
    paste_id: serde_json::Value,
    path: String,
    text: String,
    /// Byte offset in the document at arrival.
    offset: usize,
    due: u64,
    model_error_reported: bool,
}

#[derive(Debug, Clone)]
pub struct Recommendation {
    pub id: u64,
    pub paste_id: serde_json::Value,
    pub path: String,
    /// Byte span of the fragment when recommended.
    pub span: Span,
    pub fragment_text: String,
    pub probability: f64,
    pub created: u64,
    pub status: Status,
}

/// Why a due paste produced no recommendation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dropped {
    EditedAway,
    NotCode,
    DocumentUnparseable,
    NoEnclosingMethod,
    NoDuplicates,
    BelowThreshold,
    NotExtractable,
}

pub struct Engine {
    config: EngineConfig,
    model: Option<Arc<Model>>,
    docs: HashMap<String, String>,
    queue: VecDeque<PasteEvent>,
    recs: BTreeMap<u64, Recommendation>,
    next_id: u64,
    /// Outcome of every processed paste, in processing order.
    pub drops: Vec<(serde_json::Value, Dropped)>,
}

/// Occurrence of `needle` in `hay` starting closest to `near`.
fn nearest_occurrence(hay: &str, needle: &str, near: usize) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    hay.match_indices(needle)
        .map(|(i, _)| i)
        .min_by_key(|&i| (i.abs_diff(near), i))
}

impl Engine {
    pub fn new(config: EngineConfig, model: Option<Arc<Model>>) -> Self {
        Self {
            config,
            model,
            docs: HashMap::new(),
            queue: VecDeque::new(),
            recs: BTreeMap::new(),
            next_id: 1,
            drops: Vec::new(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn document(&self, path: &str) -> Option<&str> {
        self.docs.get(path).map(String::as_str)
    }

    pub fn recommendation(&self, id: u64) -> Option<&Recommendation> {
        self.recs.get(&id)
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Earliest due time among queued pastes.
    pub fn next_due(&self) -> Option<u64> {
        self.queue.iter().map(|e| e.due).min()
    }

    /// Earliest time at which a pending recommendation expires.
    pub fn next_expiry(&self) -> Option<u64> {
        self.recs
            .values()
            .filter(|r| r.status == Status::Pending)
            .map(|r| r.created.saturating_add(self.config.expiry_ms))
            .min()
    }

    /// Handles a client message arriving at `now`. `advance` is the
    /// caller's business and is ignored here.
    pub fn handle(&mut self, msg: ClientMessage, now: u64) -> Vec<EngineMessage> {
        match msg {
            ClientMessage::Doc { path, text } => {
                self.docs.insert(path, text);
                Vec::new()
            }
            ClientMessage::Paste { id, path, text, offset } => self.enqueue(id, path, text, offset, now),
            ClientMessage::Accept { id, name } => vec![self.accept(id, &name)],
            ClientMessage::Dismiss { id } => self.dismiss(id).into_iter().collect(),
            ClientMessage::Advance { .. } => Vec::new(),
        }
    }

    pub fn enqueue(
        &mut self,
        paste_id: serde_json::Value,
        path: String,
        text: String,
        offset: usize,
        now: u64,
    ) -> Vec<EngineMessage> {
        let Some(doc) = self.docs.get(&path) else {
            return vec![EngineMessage::error(None, format!("paste {paste_id} dropped: document `{path}` was never synced"))];
        };
        let offset = utf16_to_byte(doc, offset).unwrap_or(doc.len());
        self.queue.push_back(PasteEvent {
            paste_id,
            path,
            text,
            offset,
            due: now.saturating_add(self.config.delay_ms),
            model_error_reported: false,
        });
        Vec::new()
    }

    /// Expires stale recommendations, then runs every due paste through the
    /// pipeline in arrival order.
    pub fn tick(&mut self, now: u64) -> Vec<EngineMessage> {
        let mut out = Vec::new();
        for r in self.recs.values_mut() {
            if r.status == Status::Pending && now >= r.created.saturating_add(self.config.expiry_ms) {
                r.status = Status::Expired;
                out.push(EngineMessage::Expired { id: r.id });
            }
        }
        let Some(model) = self.model.clone() else {
            for e in self.queue.iter_mut().filter(|e| e.due <= now && !e.model_error_reported) {
                e.model_error_reported = true;
                out.push(EngineMessage::error(
                    None,
                    format!("no model loaded; paste {} is kept until one is available", e.paste_id),
                ));
            }
            return out;
        };
        let (due, waiting): (VecDeque<_>, VecDeque<_>) = self.queue.drain(..).partition(|e| e.due <= now);
        self.queue = waiting;
        for e in due {
            match self.analyze(&e, &model) {
                Ok((span, fragment_text, probability, duplicates)) => {
                    let doc = &self.docs[&e.path];
                    let wire_span = span_to_wire(doc, span);
                    for older in self.recs.values_mut() {
                        if older.path == e.path && older.status == Status::Pending {
                            older.status = Status::Expired;
                            out.push(EngineMessage::Expired { id: older.id });
                        }
                    }
                    let id = self.next_id;
                    self.next_id += 1;
                    self.recs.insert(
                        id,
                        Recommendation {
                            id,
                            paste_id: e.paste_id.clone(),
                            path: e.path.clone(),
                            span,
                            fragment_text,
                            probability,
                            created: now,
                            status: Status::Pending,
                        },
                    );
                    out.push(EngineMessage::Recommendation {
                        id,
                        paste_id: e.paste_id.clone(),
                        path: e.path.clone(),
                        span: wire_span,
                        probability,
                        duplicates,
                    });
                }
                Err(d) => self.drops.push((e.paste_id.clone(), d)),
            }
        }
        out
    }

    #[allow(clippy::type_complexity)]
    fn analyze(&self, e: &PasteEvent, model: &Model) -> Result<(Span, String, f64, Vec<WireDuplicate>), Dropped> {
        let doc = self.docs.get(&e.path).ok_or(Dropped::EditedAway)?;
        let at = nearest_occurrence(doc, &e.text, e.offset).ok_or(Dropped::EditedAway)?;
        parse_fragment(&e.text).map_err(|_| Dropped::NotCode)?;
        let tree = parse_file(doc, &e.path).map_err(|_| Dropped::DocumentUnparseable)?;
        let (method, fragment) =
            locate_fragment(&tree, Span::new(at, at + e.text.len())).ok_or(Dropped::NoEnclosingMethod)?;
        let dups = find_duplicates(&fragment, &tree, self.config.similarity_threshold).map_err(|_| Dropped::NoDuplicates)?;
        if dups.is_empty() {
            return Err(Dropped::NoDuplicates);
        }
        let cand = Candidate::measure(fragment, method, &ScoreWeights::default()).map_err(|_| Dropped::NotExtractable)?;
        let features = extract_with_flow(&cand.fragment, method, &cand.flow).map_err(|_| Dropped::NotExtractable)?;
        let p = model.predict_proba(features.as_slice()).map_err(|_| Dropped::BelowThreshold)?;
        if p < self.config.decision_threshold {
            return Err(Dropped::BelowThreshold);
        }
        if !is_extractable(&cand) {
            return Err(Dropped::NotExtractable);
        }
        let duplicates = dups
            .into_iter()
            .map(|d| WireDuplicate {
                method: d.method,
                similarity: d.similarity,
                exact: d.exact,
            })
            .collect();
        Ok((cand.fragment.span, cand.fragment.text.clone(), p, duplicates))
    }

    fn pending(&self, id: u64) -> Result<&Recommendation, EngineMessage> {
        match self.recs.get(&id) {
            Some(r) if r.status == Status::Pending => Ok(r),
            _ => Err(EngineMessage::error(Some(id), "unknown-or-expired")),
        }
    }

    /// Plans the extraction for a pending recommendation against the
    /// current document. Plan errors leave the recommendation pending.
    pub fn accept(&mut self, id: u64, name: &str) -> EngineMessage {
        let r = match self.pending(id) {
            Ok(r) => r,
            Err(m) => return m,
        };
        let doc = match self.docs.get(&r.path) {
            Some(d) => d,
            None => return EngineMessage::error(Some(id), "document is no longer synced"),
        };
        let Some(at) = nearest_occurrence(doc, &r.fragment_text, r.span.start) else {
            return EngineMessage::error(Some(id), "the recommended fragment is no longer in the document");
        };
        let tree = match parse_file(doc, &r.path) {
            Ok(t) => t,
            Err(e) => return EngineMessage::error(Some(id), format!("document does not parse: {e}")),
        };
        let Some((method, fragment)) = locate_fragment(&tree, Span::new(at, at + r.fragment_text.len())) else {
            return EngineMessage::error(Some(id), "the recommended fragment is no longer a statement run");
        };
        let plan = find_duplicates(&fragment, &tree, self.config.similarity_threshold)
            .and_then(|d| plan_extraction(&tree, &fragment, method, name, &d));
        match plan {
            Ok(p) => {
                let edits = p
                    .edits
                    .iter()
                    .map(|e| WireEdit {
                        path: e.path.clone(),
                        span: span_to_wire(doc, e.span),
                        new_text: e.new_text.clone(),
                    })
                    .collect();
                self.recs.get_mut(&id).expect("pending").status = Status::Accepted;
                EngineMessage::Edits { id, edits }
            }
            Err(e) => EngineMessage::error(Some(id), e.to_string()),
        }
    }

    pub fn dismiss(&mut self, id: u64) -> Option<EngineMessage> {
        if let Err(m) = self.pending(id) {
            return Some(m);
        }
        self.recs.get_mut(&id).expect("pending").status = Status::Dismissed;
        None
    }
}
