//! Dataset manifests: one JSON object per line, one line per recording
//! session. Loading is order-preserving and validates uniqueness of
//! (subject, session) pairs.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground material of a walking session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ground {
    Tiles,
    Carpet,
    Synthetic,
}

/// Footwear (or activity) condition of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Footwear {
    Barefoot,
    Slippers,
    Sneakers,
    Speaking,
    Synthetic,
}

impl std::fmt::Display for Ground {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Ground::Tiles => "tiles",
            Ground::Carpet => "carpet",
            Ground::Synthetic => "synthetic",
        };
        write!(f, "{s}")
    }
}

impl std::fmt::Display for Footwear {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Footwear::Barefoot => "barefoot",
            Footwear::Slippers => "slippers",
            Footwear::Sneakers => "sneakers",
            Footwear::Speaking => "speaking",
            Footwear::Synthetic => "synthetic",
        };
        write!(f, "{s}")
    }
}

/// One recorded walking session: both ear recordings plus its condition
/// tags and, when known, the true number of steps taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub subject_id: String,
    pub session_id: String,
    pub ground: Ground,
    pub footwear: Footwear,
    pub left_path: String,
    pub right_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_count: Option<u64>,
}

/// Load and validate a manifest. Blank lines are ignored; any schema
/// problem is reported with its 1-based line number.
pub fn load_manifest(path: &Path) -> Result<Vec<SessionRecord>> {
    let text = fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: SessionRecord = serde_json::from_str(line).map_err(|e| Error::Schema {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let key = (record.subject_id.clone(), record.session_id.clone());
        if !seen.insert(key) {
            return Err(Error::Schema {
                line: idx + 1,
                message: format!(
                    "duplicate session ({}, {})",
                    record.subject_id, record.session_id
                ),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Write a manifest, one JSON object per line, in the given order.
pub fn save_manifest(path: &Path, records: &[SessionRecord]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::Format(format!("manifest serialization failed: {e}")))?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(subject: &str, session: &str) -> SessionRecord {
        SessionRecord {
            subject_id: subject.into(),
            session_id: session.into(),
            ground: Ground::Tiles,
            footwear: Footwear::Sneakers,
            left_path: format!("{subject}_{session}_left.wav"),
            right_path: format!("{subject}_{session}_right.wav"),
            step_count: Some(166),
        }
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(load_manifest(&path).unwrap().is_empty());
    }

    #[test]
    fn full_study_shape_round_trips() {
        // 31 subjects x 8 sessions = 248 records.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.jsonl");
        let mut records = Vec::new();
        for s in 0..31 {
            for j in 0..8 {
                records.push(record(&format!("s{s:02}"), &format!("sess{j}")));
            }
        }
        save_manifest(&path, &records).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded.len(), 248);
        assert_eq!(loaded, records);
    }

    #[test]
    fn duplicate_session_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.jsonl");
        save_manifest(&path, &[record("a", "1"), record("b", "1"), record("a", "1")]).unwrap();
        match load_manifest(&path) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.jsonl");
        let good = serde_json::to_string(&record("a", "1")).unwrap();
        std::fs::write(&path, format!("{good}\n{{\"subject_id\":\"x\"}}\n")).unwrap();
        match load_manifest(&path) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn step_count_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nostep.jsonl");
        let mut r = record("a", "1");
        r.step_count = None;
        save_manifest(&path, std::slice::from_ref(&r)).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded[0].step_count, None);
    }
}
