//! Import of externally produced evaluations.
//!
//! Document layout (formalized in `schemas/evaluations.xsd`):
//!
//! ```xml
//! <evaluations>
//!   <evaluation record_id="ext-1" vehicle_id="v1">
//!     <comfort>4</comfort>
//!     <consumption>5</consumption>
//!     <safety>3</safety>
//!     <timestamp>2026-03-01T10:00:00Z</timestamp>  <!-- optional -->
//!   </evaluation>
//! </evaluations>
//! ```
//!
//! A document that is not well-formed, or whose root or top-level children
//! do not follow this layout, is rejected as a whole. Individual
//! `evaluation` records that break the layout are rejected one by one.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{RatingRecord, UserId, VehicleId, EXTERNAL_USER_ID};

pub const ROOT_ELEMENT: &str = "evaluations";
pub const RECORD_ELEMENT: &str = "evaluation";
pub const RECORD_ATTRIBUTES: [&str; 2] = ["record_id", "vehicle_id"];
pub const SCORE_ELEMENTS: [&str; 3] = ["comfort", "consumption", "safety"];
pub const TIMESTAMP_ELEMENT: &str = "timestamp";

/// The schema document shipped with the crate.
pub const SCHEMA_XSD: &str = include_str!("../../schemas/evaluations.xsd");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("document is not well-formed XML: {0}")]
    Malformed(String),
    #[error("document does not match the evaluation schema: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRecord {
    /// 1-based position of the `evaluation` element in the document.
    pub position: usize,
    pub record_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ImportReport {
    pub accepted: usize,
    pub rejected: Vec<RejectedRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalEvaluation {
    pub record_id: String,
    pub rating: RatingRecord,
}

/// Schema-valid records with their positions, plus the records that failed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedDocument {
    pub evaluations: Vec<(usize, ExternalEvaluation)>,
    pub rejected: Vec<RejectedRecord>,
}

#[derive(Default)]
struct RecordBuilder {
    position: usize,
    attributes: Vec<(String, String)>,
    children: Vec<(String, String)>,
    problems: Vec<String>,
}

impl RecordBuilder {
    fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    fn finish(mut self, now: DateTime<Utc>) -> Result<ExternalEvaluation, RejectedRecord> {
        let record_id = self.attribute("record_id").map(str::to_owned);
        for (name, _) in &self.attributes {
            if !RECORD_ATTRIBUTES.contains(&name.as_str()) {
                self.problems.push(format!("unexpected attribute {name:?}"));
            }
        }
        match &record_id {
            None => self.problems.push("missing attribute record_id".into()),
            Some(id) if id.is_empty() || id.chars().any(char::is_whitespace) => {
                self.problems.push(format!("record_id {id:?} is not a token"))
            }
            Some(_) => {}
        }
        let vehicle_id = match self.attribute("vehicle_id") {
            None => {
                self.problems.push("missing attribute vehicle_id".into());
                None
            }
            Some(v) if v.trim().is_empty() => {
                self.problems.push("vehicle_id is empty".into());
                None
            }
            Some(v) => Some(v.to_owned()),
        };

        for (name, _) in &self.children {
            if !SCORE_ELEMENTS.contains(&name.as_str()) && name != TIMESTAMP_ELEMENT {
                self.problems.push(format!("unexpected element <{name}>"));
            }
        }
        let mut scores = [0u8; 3];
        for (slot, element) in scores.iter_mut().zip(SCORE_ELEMENTS) {
            match self.single_child(element) {
                Ok(Some(text)) => match text.trim().parse::<i64>() {
                    Ok(v) if (1..=5).contains(&v) => *slot = v as u8,
                    Ok(v) => self.problems.push(format!("{element} score {v} is outside 1..=5")),
                    Err(_) => self.problems.push(format!("{element} value {text:?} is not an integer")),
                },
                Ok(None) => self.problems.push(format!("missing element <{element}>")),
                Err(p) => self.problems.push(p),
            }
        }
        let timestamp = match self.single_child(TIMESTAMP_ELEMENT) {
            Ok(Some(text)) => match DateTime::parse_from_rfc3339(text.trim()) {
                Ok(t) => t.with_timezone(&Utc),
                Err(e) => {
                    self.problems.push(format!("timestamp {text:?} is not RFC 3339: {e}"));
                    now
                }
            },
            Ok(None) => now,
            Err(p) => {
                self.problems.push(p);
                now
            }
        };

        if !self.problems.is_empty() {
            return Err(RejectedRecord {
                position: self.position,
                record_id,
                reason: self.problems.join("; "),
            });
        }
        Ok(ExternalEvaluation {
            record_id: record_id.expect("checked above"),
            rating: RatingRecord {
                vehicle_id: VehicleId(vehicle_id.expect("checked above")),
                user_id: UserId::new(EXTERNAL_USER_ID),
                comfort: scores[0],
                consumption: scores[1],
                safety: scores[2],
                timestamp,
            },
        })
    }

    fn single_child(&self, name: &str) -> Result<Option<String>, String> {
        let mut matches = self.children.iter().filter(|(k, _)| k == name);
        match (matches.next(), matches.next()) {
            (None, _) => Ok(None),
            (Some((_, text)), None) => Ok(Some(text.clone())),
            (Some(_), Some(_)) => Err(format!("element <{name}> appears more than once")),
        }
    }
}

fn element_name(e: &BytesStart<'_>) -> Result<String, ImportError> {
    std::str::from_utf8(e.name().as_ref())
        .map(str::to_owned)
        .map_err(|err| ImportError::Malformed(err.to_string()))
}

fn attributes(e: &BytesStart<'_>) -> Result<Vec<(String, String)>, ImportError> {
    e.attributes()
        .map(|attr| {
            let attr = attr.map_err(|err| ImportError::Malformed(err.to_string()))?;
            let key = std::str::from_utf8(attr.key.as_ref())
                .map_err(|err| ImportError::Malformed(err.to_string()))?
                .to_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| ImportError::Malformed(err.to_string()))?
                .into_owned();
            Ok((key, value))
        })
        .collect()
}

/// Parses and validates a document without touching any store.
pub fn parse_document(xml: &[u8], now: DateTime<Utc>) -> Result<ParsedDocument, ImportError> {
    let mut reader = Reader::from_reader(xml);
    reader.config_mut().trim_text(true);

    let mut buf = Vec::new();
    let mut depth = 0usize;
    let mut root_done = false;
    let mut root_seen = false;
    let mut positions = 0usize;
    let mut record: Option<RecordBuilder> = None;
    let mut child: Option<(String, String)> = None;
    let mut parsed = ParsedDocument::default();
    let mut seen_ids = BTreeSet::new();

    let mut finish_record = |builder: RecordBuilder, parsed: &mut ParsedDocument| {
        let position = builder.position;
        match builder.finish(now) {
            Ok(eval) if !seen_ids.insert(eval.record_id.clone()) => parsed.rejected.push(RejectedRecord {
                position,
                record_id: Some(eval.record_id),
                reason: "duplicate record_id in document".into(),
            }),
            Ok(eval) => parsed.evaluations.push((position, eval)),
            Err(rejected) => parsed.rejected.push(rejected),
        }
    };

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| ImportError::Malformed(format!("at byte {}: {e}", reader.error_position())))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = element_name(e)?;
                depth += 1;
                match depth {
                    1 => {
                        if root_seen || root_done {
                            return Err(ImportError::Malformed("more than one root element".into()));
                        }
                        root_seen = true;
                        if name != ROOT_ELEMENT {
                            return Err(ImportError::Schema(format!(
                                "root element is <{name}>, expected <{ROOT_ELEMENT}>"
                            )));
                        }
                    }
                    2 => {
                        if name != RECORD_ELEMENT {
                            return Err(ImportError::Schema(format!(
                                "unexpected element <{name}> inside <{ROOT_ELEMENT}>"
                            )));
                        }
                        positions += 1;
                        record = Some(RecordBuilder {
                            position: positions,
                            attributes: attributes(e)?,
                            ..Default::default()
                        });
                    }
                    3 => {
                        attributes(e)?;
                        child = Some((name, String::new()));
                    }
                    _ => {
                        attributes(e)?;
                        if let (Some(r), Some((parent, _))) = (record.as_mut(), child.as_ref()) {
                            r.problems
                                .push(format!("unexpected element <{name}> inside <{parent}>"));
                        }
                    }
                }
                if is_empty {
                    close_element(&mut depth, &mut record, &mut child, &mut root_done, &mut |b| {
                        finish_record(b, &mut parsed)
                    });
                }
            }
            Event::End(_) => {
                close_element(&mut depth, &mut record, &mut child, &mut root_done, &mut |b| {
                    finish_record(b, &mut parsed)
                });
            }
            Event::Text(ref t) => {
                let text = t
                    .unescape()
                    .map_err(|e| ImportError::Malformed(e.to_string()))?;
                append_text(depth, &text, &mut record, &mut child)?;
            }
            Event::CData(ref t) => {
                let text = std::str::from_utf8(t.as_ref())
                    .map_err(|e| ImportError::Malformed(e.to_string()))?
                    .to_owned();
                append_text(depth, &text, &mut record, &mut child)?;
            }
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
        }
        buf.clear();
    }

    if depth != 0 {
        return Err(ImportError::Malformed("unexpected end of document".into()));
    }
    if !root_seen {
        return Err(ImportError::Malformed("document has no root element".into()));
    }
    Ok(parsed)
}

fn close_element(
    depth: &mut usize,
    record: &mut Option<RecordBuilder>,
    child: &mut Option<(String, String)>,
    root_done: &mut bool,
    finish: &mut dyn FnMut(RecordBuilder),
) {
    match *depth {
        1 => *root_done = true,
        2 => {
            if let Some(r) = record.take() {
                finish(r);
            }
        }
        3 => {
            if let (Some(r), Some(c)) = (record.as_mut(), child.take()) {
                r.children.push(c);
            }
        }
        _ => {}
    }
    *depth = depth.saturating_sub(1);
}

fn append_text(
    depth: usize,
    text: &str,
    record: &mut Option<RecordBuilder>,
    child: &mut Option<(String, String)>,
) -> Result<(), ImportError> {
    if text.trim().is_empty() {
        return Ok(());
    }
    match depth {
        0 => Err(ImportError::Malformed("text outside the root element".into())),
        1 => Err(ImportError::Schema(format!("unexpected text inside <{ROOT_ELEMENT}>"))),
        2 => {
            if let Some(r) = record.as_mut() {
                r.problems.push("unexpected text inside <evaluation>".into());
            }
            Ok(())
        }
        3 => {
            if let Some((_, t)) = child.as_mut() {
                t.push_str(text);
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
