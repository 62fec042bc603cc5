//! Feature matrices on disk: a JSON document with the layout header and one
//! row per cycle, provenance included.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureLayout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub subject_id: String,
    pub session_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureFile {
    pub layout: FeatureLayout,
    pub rows: Vec<FeatureRow>,
}

pub fn write_features(path: &Path, file: &FeatureFile) -> Result<()> {
    for (i, row) in file.rows.iter().enumerate() {
        if row.values.len() != file.layout.len() {
            return Err(Error::LayoutMismatch {
                expected: file.layout.to_string(),
                got: format!("row {i} of length {}", row.values.len()),
            });
        }
    }
    let json = serde_json::to_string(file)
        .map_err(|e| Error::Format(format!("feature serialization failed: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<FeatureFile> {
    let file: FeatureFile = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    for (i, row) in file.rows.iter().enumerate() {
        if row.values.len() != file.layout.len() {
            return Err(Error::LayoutMismatch {
                expected: file.layout.to_string(),
                got: format!("row {i} of length {}", row.values.len()),
            });
        }
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureMode, Side};

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.json");
        let layout = FeatureLayout { mode: FeatureMode::Mfcc, side: Side::Fused };
        let file = FeatureFile {
            layout,
            rows: vec![FeatureRow {
                subject_id: "s00".into(),
                session_id: "sess0".into(),
                values: (0..80).map(|i| i as f64 * 0.125).collect(),
            }],
        };
        write_features(&path, &file).unwrap();
        let back = read_features(&path).unwrap();
        assert_eq!(back.layout, layout);
        assert_eq!(back.rows, file.rows);
    }

    #[test]
    fn length_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.json");
        let layout = FeatureLayout { mode: FeatureMode::Mfcc, side: Side::Left };
        let file = FeatureFile {
            layout,
            rows: vec![FeatureRow {
                subject_id: "s".into(),
                session_id: "x".into(),
                values: vec![1.0; 10],
            }],
        };
        assert!(write_features(&path, &file).is_err());
    }
}
