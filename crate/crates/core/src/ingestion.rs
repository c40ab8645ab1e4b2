//! Correction-event and roster files.
//!
//! Both formats are plain UTF-8 CSV without quoting. Identifiers are opaque
//! strings and may not contain commas.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EVENTS_HEADER: &str = "week,corrector_id,corrected_id,count";
pub const ROSTER_HEADER: &str = "resident_id,entry_week,exit_week,graduated";

/// One corrector -> corrected incident (or batch of `count` incidents) in a week.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrectionEvent {
    pub week: i64,
    pub corrector_id: String,
    pub corrected_id: String,
    pub count: u32,
}

impl CorrectionEvent {
    pub fn new(week: i64, corrector: impl Into<String>, corrected: impl Into<String>, count: u32) -> Self {
        CorrectionEvent {
            week,
            corrector_id: corrector.into(),
            corrected_id: corrected.into(),
            count,
        }
    }
}

/// Roster entry: tenure window (inclusive calendar weeks) and outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidentRecord {
    pub resident_id: String,
    pub entry_week: i64,
    pub exit_week: i64,
    pub graduated: bool,
}

impl ResidentRecord {
    pub fn new(id: impl Into<String>, entry_week: i64, exit_week: i64, graduated: bool) -> Self {
        ResidentRecord {
            resident_id: id.into(),
            entry_week,
            exit_week,
            graduated,
        }
    }

    /// Number of calendar weeks in the tenure window.
    pub fn tenure(&self) -> usize {
        (self.exit_week - self.entry_week + 1) as usize
    }

    pub fn present_in(&self, week: i64) -> bool {
        self.entry_week <= week && week <= self.exit_week
    }
}

/// Splits `text` into numbered, non-blank lines with CR and BOM removed.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn header_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn identifier(line: usize, field: &str, what: &str) -> Result<String> {
    let id = field.trim();
    if id.is_empty() {
        return Err(parse_err(line, format!("empty {what}")));
    }
    Ok(id.to_string())
}

fn integer(line: usize, field: &str, what: &str) -> Result<i64> {
    field
        .trim()
        .parse::<i64>()
        .map_err(|_| parse_err(line, format!("{what} {:?} is not an integer", field.trim())))
}

/// Parses an events file. The `count` column is optional, both in the
/// header and per row; a missing count means one correction.
pub fn parse_events(text: &str) -> Result<Vec<CorrectionEvent>> {
    let mut lines = numbered_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header"))?;
    let cols = header_fields(header);
    let has_count = match cols.as_slice() {
        ["week", "corrector_id", "corrected_id"] => false,
        ["week", "corrector_id", "corrected_id", "count"] => true,
        _ => {
            return Err(parse_err(
                hline,
                format!("expected header `{EVENTS_HEADER}` (count optional)"),
            ))
        }
    };

    let mut events = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').collect();
        let max_fields = if has_count { 4 } else { 3 };
        if fields.len() < 3 || fields.len() > max_fields {
            return Err(parse_err(
                line,
                format!("expected {max_fields} fields, found {}", fields.len()),
            ));
        }
        let week = integer(line, fields[0], "week")?;
        if week < 0 {
            return Err(parse_err(line, format!("negative week {week}")));
        }
        let corrector = identifier(line, fields[1], "corrector_id")?;
        let corrected = identifier(line, fields[2], "corrected_id")?;
        if corrector == corrected {
            return Err(parse_err(line, format!("self-correction by {corrector}")));
        }
        let count = match fields.get(3).map(|f| f.trim()) {
            None | Some("") => 1,
            Some(raw) => {
                let c = raw
                    .parse::<i64>()
                    .map_err(|_| parse_err(line, format!("count {raw:?} is not an integer")))?;
                if c < 1 || c > u32::MAX as i64 {
                    return Err(parse_err(line, format!("count {c} out of range")));
                }
                c as u32
            }
        };
        events.push(CorrectionEvent {
            week,
            corrector_id: corrector,
            corrected_id: corrected,
            count,
        });
    }
    Ok(events)
}

fn boolean(line: usize, field: &str) -> Result<bool> {
    match field.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(parse_err(line, format!("unknown graduated token {other:?}"))),
    }
}

/// Parses a roster file. Resident ids must be unique.
pub fn parse_roster(text: &str) -> Result<Vec<ResidentRecord>> {
    let mut lines = numbered_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header"))?;
    if header_fields(header) != ["resident_id", "entry_week", "exit_week", "graduated"] {
        return Err(parse_err(hline, format!("expected header `{ROSTER_HEADER}`")));
    }

    let mut seen = HashSet::new();
    let mut roster = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let id = identifier(line, fields[0], "resident_id")?;
        let entry = integer(line, fields[1], "entry_week")?;
        let exit = integer(line, fields[2], "exit_week")?;
        if entry > exit {
            return Err(parse_err(
                line,
                format!("entry_week {entry} is after exit_week {exit}"),
            ));
        }
        let graduated = boolean(line, fields[3])?;
        if !seen.insert(id.clone()) {
            return Err(parse_err(line, format!("duplicate resident_id {id}")));
        }
        roster.push(ResidentRecord {
            resident_id: id,
            entry_week: entry,
            exit_week: exit,
            graduated,
        });
    }
    Ok(roster)
}

pub fn serialize_events(events: &[CorrectionEvent]) -> String {
    let mut out = String::with_capacity(32 * (events.len() + 1));
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.week, e.corrector_id, e.corrected_id, e.count
        ));
    }
    out
}

pub fn serialize_roster(roster: &[ResidentRecord]) -> String {
    let mut out = String::with_capacity(32 * (roster.len() + 1));
    out.push_str(ROSTER_HEADER);
    out.push('\n');
    for r in roster {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.resident_id,
            r.entry_week,
            r.exit_week,
            u8::from(r.graduated)
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    UnknownResident { resident_id: String },
    OutsideTenure { resident_id: String, week: i64 },
    EmptyEvents,
}

/// A problem found by [`validate`]. `event_index` points into the events slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub event_index: Option<usize>,
    #[serde(flatten)]
    pub kind: IssueKind,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            IssueKind::UnknownResident { resident_id } => {
                write!(f, "unknown resident {resident_id}")
            }
            IssueKind::OutsideTenure { resident_id, week } => {
                write!(f, "event outside tenure: {resident_id} in week {week}")
            }
            IssueKind::EmptyEvents => write!(f, "event set is empty"),
        }?;
        if let Some(i) = self.event_index {
            write!(f, " (event {i})")?;
        }
        Ok(())
    }
}

impl ValidationIssue {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Cross-checks events against the roster. Unknown residents are errors;
/// out-of-tenure events are warnings (network construction drops them).
pub fn validate(events: &[CorrectionEvent], roster: &[ResidentRecord]) -> Vec<ValidationIssue> {
    let by_id: BTreeMap<&str, &ResidentRecord> =
        roster.iter().map(|r| (r.resident_id.as_str(), r)).collect();
    let mut issues = Vec::new();
    if events.is_empty() {
        issues.push(ValidationIssue {
            severity: Severity::Warning,
            event_index: None,
            kind: IssueKind::EmptyEvents,
        });
    }
    for (i, e) in events.iter().enumerate() {
        for id in [&e.corrector_id, &e.corrected_id] {
            match by_id.get(id.as_str()) {
                None => issues.push(ValidationIssue {
                    severity: Severity::Error,
                    event_index: Some(i),
                    kind: IssueKind::UnknownResident {
                        resident_id: id.clone(),
                    },
                }),
                Some(r) if !r.present_in(e.week) => issues.push(ValidationIssue {
                    severity: Severity::Warning,
                    event_index: Some(i),
                    kind: IssueKind::OutsideTenure {
                        resident_id: id.clone(),
                        week: e.week,
                    },
                }),
                Some(_) => {}
            }
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn missing_count_defaults_to_one() {
        let ev = parse_events("week,corrector_id,corrected_id\n3,r1,r2").unwrap();
        assert_eq!(ev, vec![CorrectionEvent::new(3, "r1", "r2", 1)]);
    }

    #[test]
    fn rows_are_not_merged() {
        let ev = parse_events("week,corrector_id,corrected_id,count\n3,r1,r2,2\n3,r1,r2,3").unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!((ev[0].count, ev[1].count), (2, 3));
    }

    #[test]
    fn self_correction_names_line() {
        let err = parse_events("week,corrector_id,corrected_id,count\n1,a,b,1\n3,r1,r1,1").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_rows() {
        let h = "week,corrector_id,corrected_id,count\n";
        for row in ["x,r1,r2,1", "3,r1,r2,0", "-1,r1,r2,1", "3,r1,r2,1,9", "3,,r2,1", "3,r1,r2,1.5"] {
            assert!(parse_events(&format!("{h}{row}")).is_err(), "{row}");
        }
        assert!(parse_events("week,who,whom\n1,a,b").is_err());
        assert!(parse_events("").is_err());
    }

    #[test]
    fn crlf_and_blank_lines() {
        let ev = parse_events("week,corrector_id,corrected_id,count\r\n1,a,b,2\r\n\r\n2,b,a,\r\n").unwrap();
        assert_eq!(ev, vec![CorrectionEvent::new(1, "a", "b", 2), CorrectionEvent::new(2, "b", "a", 1)]);
    }

    #[test]
    fn roster_basic() {
        let r = parse_roster("resident_id,entry_week,exit_week,graduated\nr1,0,23,1").unwrap();
        assert_eq!(r, vec![ResidentRecord::new("r1", 0, 23, true)]);
        let r = parse_roster("resident_id,entry_week,exit_week,graduated\na,0,1,TRUE\nb,0,1,False\nc,2,2,0").unwrap();
        assert_eq!(r.iter().map(|x| x.graduated).collect::<Vec<_>>(), vec![true, false, false]);
    }

    #[test]
    fn roster_errors() {
        let h = "resident_id,entry_week,exit_week,graduated\n";
        assert!(parse_roster(&format!("{h}r1,0,3,1\nr1,4,5,0")).is_err());
        assert!(parse_roster(&format!("{h}r1,5,2,0")).is_err());
        assert!(parse_roster(&format!("{h}r1,0,2,yes")).is_err());
    }

    fn roster() -> Vec<ResidentRecord> {
        vec![ResidentRecord::new("r1", 0, 5, true), ResidentRecord::new("r3", 0, 10, false)]
    }

    #[test]
    fn validate_unknown_resident() {
        let issues = validate(&[CorrectionEvent::new(3, "r1", "r2", 1)], &roster());
        assert_eq!(issues.len(), 1);
        assert!(issues[0].is_error());
        assert_eq!(issues[0].to_string(), "unknown resident r2 (event 0)");
    }

    #[test]
    fn validate_outside_tenure() {
        let issues = validate(&[CorrectionEvent::new(9, "r1", "r3", 1)], &roster());
        assert_eq!(issues.len(), 1);
        assert!(issues[0].to_string().starts_with("event outside tenure"));
        assert!(!issues[0].is_error());
    }

    #[test]
    fn validate_clean_and_empty() {
        assert!(validate(&[CorrectionEvent::new(2, "r1", "r3", 1)], &roster()).is_empty());
        let issues = validate(&[], &roster());
        assert_eq!(issues[0].kind, IssueKind::EmptyEvents);
        assert_eq!(issues[0].severity, Severity::Warning);
    }

    fn ident() -> impl Strategy<Value = String> {
        "[A-Za-z0-9_.-]{1,8}"
    }

    proptest! {
        #[test]
        fn events_round_trip(rows in prop::collection::vec((0i64..500, ident(), ident(), 1u32..50), 0..40)) {
            let events: Vec<_> = rows
                .into_iter()
                .filter(|(_, a, b, _)| a != b)
                .map(|(w, a, b, c)| CorrectionEvent::new(w, a, b, c))
                .collect();
            let text = serialize_events(&events);
            let parsed = parse_events(&text).unwrap();
            prop_assert_eq!(parsed.len(), text.lines().count() - 1);
            prop_assert_eq!(parsed, events);
        }
    }
}
