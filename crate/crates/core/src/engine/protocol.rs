//! Newline-delimited JSON messages between the engine and an editor.
//!
//! Offsets and spans on the wire count UTF-16 code units, the unit editors
//! use for positions; the engine works in bytes internally.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::syntax::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClientMessage {
    Doc {
        path: String,
        text: String,
    },
    Paste {
        /// Echoed back unchanged; any JSON scalar.
        id: serde_json::Value,
        path: String,
        text: String,
        offset: usize,
    },
    Accept {
        id: u64,
        name: String,
    },
    Dismiss {
        id: u64,
    },
    Advance {
        ms: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireDuplicate {
    pub method: String,
    pub similarity: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEdit {
    pub path: String,
    pub span: WireSpan,
    pub new_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EngineMessage {
    Recommendation {
        id: u64,
        paste_id: serde_json::Value,
        path: String,
        span: WireSpan,
        probability: f64,
        duplicates: Vec<WireDuplicate>,
    },
    Edits {
        id: u64,
        edits: Vec<WireEdit>,
    },
    Error {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        id: Option<u64>,
        message: String,
    },
    Expired {
        id: u64,
    },
}

impl EngineMessage {
    pub fn error(id: Option<u64>, message: impl Into<String>) -> Self {
        EngineMessage::Error {
            id,
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("engine messages serialize")
    }
}

pub fn parse_client_line(line: &str) -> Result<ClientMessage, Error> {
    serde_json::from_str(line).map_err(|e| Error::Protocol(e.to_string()))
}

/// UTF-16 position of a byte offset, which must fall on a char boundary.
pub fn byte_to_utf16(text: &str, byte: usize) -> usize {
    text[..byte].encode_utf16().count()
}

/// Byte offset of a UTF-16 position; `None` when it is past the end or
/// inside a surrogate pair.
pub fn utf16_to_byte(text: &str, unit: usize) -> Option<usize> {
    let mut seen = 0;
    for (b, c) in text.char_indices() {
        if seen == unit {
            return Some(b);
        }
        seen += c.len_utf16();
        if seen > unit {
            return None;
        }
    }
    (seen == unit).then_some(text.len())
}

pub fn span_to_wire(text: &str, span: Span) -> WireSpan {
    WireSpan {
        start: byte_to_utf16(text, span.start),
        end: byte_to_utf16(text, span.end),
    }
}

pub fn span_from_wire(text: &str, span: WireSpan) -> Option<Span> {
    let start = utf16_to_byte(text, span.start)?;
    let end = utf16_to_byte(text, span.end)?;
    (start <= end).then(|| Span::new(start, end))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_messages_parse() {
        let m = parse_client_line(r#"{"kind":"paste","id":7,"path":"A.java","text":"x();","offset":3}"#).unwrap();
        assert_eq!(
            m,
            ClientMessage::Paste {
                id: 7.into(),
                path: "A.java".into(),
                text: "x();".into(),
                offset: 3
            }
        );
        assert_eq!(
            parse_client_line(r#"{"kind":"advance","ms":9999}"#).unwrap(),
            ClientMessage::Advance { ms: 9999 }
        );
        assert!(parse_client_line(r#"{"kind":"advance"}"#).is_err());
        assert!(parse_client_line(r#"{"kind":"shout","ms":1}"#).is_err());
        assert!(parse_client_line("not json").is_err());
    }

    #[test]
    fn engine_messages_serialize() {
        let e = EngineMessage::error(None, "boom");
        assert_eq!(e.to_line(), r#"{"kind":"error","message":"boom"}"#);
        let e = EngineMessage::Expired { id: 4 };
        assert_eq!(e.to_line(), r#"{"kind":"expired","id":4}"#);
        let r = EngineMessage::Recommendation {
            id: 1,
            paste_id: "p".into(),
            path: "A.java".into(),
            span: WireSpan { start: 1, end: 2 },
            probability: 0.75,
            duplicates: vec![WireDuplicate { method: "f".into(), similarity: 1.0, exact: true }],
        };
        let back: EngineMessage = serde_json::from_str(&r.to_line()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn utf16_offsets() {
        let s = "a\u{e9}\u{1F600}b";
        // bytes: a=0, é=1..3, emoji=3..7, b=7
        assert_eq!(byte_to_utf16(s, 3), 2);
        assert_eq!(byte_to_utf16(s, 7), 4);
        assert_eq!(utf16_to_byte(s, 4), Some(7));
        assert_eq!(utf16_to_byte(s, 3), None);
        assert_eq!(utf16_to_byte(s, 5), Some(8));
        assert_eq!(utf16_to_byte(s, 6), None);
        let sp = Span::new(1, 7);
        assert_eq!(span_from_wire(s, span_to_wire(s, sp)), Some(sp));
    }
}
