//! Trace events and their JSON Lines form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::Formula;
use crate::relation::RelationLabel;
use crate::rules::Rule;

/// Speaker name used for system transitions.
pub const SYSTEM: &str = "system";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Proposal,
    Evaluation,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    pub beat: usize,
    pub speaker: String,
    pub kind: EventKind,
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<RelationLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub violation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalPhase {
    Agreement,
    Disagreement,
}

/// The last line of a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFooter {
    pub phase: TerminalPhase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Formula>,
    pub agreeing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("trace line {line}: event after the terminal line")]
    AfterFooter { line: usize },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Event(TraceEvent),
    Footer(TraceFooter),
}

pub fn to_jsonl(events: &[TraceEvent], footer: Option<&TraceFooter>) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
        out.push('\n');
    }
    if let Some(f) = footer {
        out.push_str(&serde_json::to_string(f).expect("trace footer serializes"));
        out.push('\n');
    }
    out
}

/// Parses a trace; blank lines are skipped and line numbers are 1-based.
pub fn from_jsonl(text: &str) -> Result<(Vec<TraceEvent>, Option<TraceFooter>), TraceError> {
    let mut events = Vec::new();
    let mut footer = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if footer.is_some() {
            return Err(TraceError::AfterFooter { line });
        }
        match serde_json::from_str::<Line>(raw) {
            Ok(Line::Event(e)) => events.push(e),
            Ok(Line::Footer(f)) => footer = Some(f),
            Err(_) => {
                // Re-parse as an event for a more useful message.
                let detail = serde_json::from_str::<TraceEvent>(raw)
                    .err()
                    .map_or_else(|| "unrecognized line".to_string(), |e| e.to_string());
                return Err(TraceError::Parse { line, detail });
            }
        }
    }
    Ok((events, footer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Abbrev;

    #[test]
    fn field_order_and_round_trip() {
        let e = TraceEvent {
            beat: 2,
            speaker: "A".into(),
            kind: EventKind::Evaluation,
            rule: Rule::Pair(Abbrev::Co, Abbrev::RD),
            formula: None,
            label: Some(RelationLabel::RelDis),
            target: Some("B".into()),
            violation: false,
        };
        let footer = TraceFooter {
            phase: TerminalPhase::Agreement,
            outcome: Some("a & b".parse().unwrap()),
            agreeing: vec!["A".into()],
        };
        let text = to_jsonl(std::slice::from_ref(&e), Some(&footer));
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"beat":2,"speaker":"A","kind":"evaluation","rule":"Co-RD","label":"relDis","target":"B","violation":false}"#
        );
        assert_eq!(
            text.lines().nth(1).unwrap(),
            r#"{"phase":"agreement","outcome":"a & b","agreeing":["A"]}"#
        );
        let (events, f) = from_jsonl(&text).unwrap();
        assert_eq!(events, vec![e]);
        assert_eq!(f, Some(footer));
    }

    #[test]
    fn bad_lines_are_located() {
        let err = from_jsonl("\n{\"beat\":0}\n").unwrap_err();
        assert!(matches!(err, TraceError::Parse { line: 2, .. }));
        let err = from_jsonl("{\"phase\":\"disagreement\",\"agreeing\":[]}\n{\"phase\":\"agreement\",\"agreeing\":[]}").unwrap_err();
        assert_eq!(err, TraceError::AfterFooter { line: 2 });
    }
}
