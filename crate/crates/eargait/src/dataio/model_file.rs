//! Versioned model container.
//!
//! The file carries the trained SVM together with the full preprocessing
//! configuration (rates, cutoffs, feature mode), so a model can never be
//! applied to features produced under different settings. JSON keeps f64
//! values exact (shortest round-tripping representation), so load∘save is
//! the identity on every field.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::SvmModel;
use crate::dsp::SegmentConfig;
use crate::error::{Error, Result};
use crate::features::FeatureMode;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// The preprocessing settings a model was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub target_rate: u32,
    pub lowpass_cutoff_hz: f64,
    pub envelope_cutoff_hz: f64,
    pub min_cycle_s: f64,
    pub max_cycle_s: f64,
    pub feature_mode: FeatureMode,
}

impl PreprocessConfig {
    pub fn from_segment(cfg: &SegmentConfig, feature_mode: FeatureMode) -> Self {
        PreprocessConfig {
            target_rate: cfg.target_rate,
            lowpass_cutoff_hz: cfg.lowpass_cutoff_hz,
            envelope_cutoff_hz: cfg.envelope_cutoff_hz,
            min_cycle_s: cfg.min_cycle_s,
            max_cycle_s: cfg.max_cycle_s,
            feature_mode,
        }
    }
}

/// On-disk model format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub preprocessing: PreprocessConfig,
    pub model: SvmModel,
}

/// Save a trained model. Models that violate their dual invariants (no
/// support vectors, unbalanced coefficients, non-finite values) are
/// rejected here rather than written.
pub fn save_model(file: &ModelFile, path: &Path) -> Result<()> {
    file.model.validate()?;
    if !file.model.decision_threshold.is_finite() {
        return Err(Error::Parameter(
            "cannot persist a non-finite decision threshold".into(),
        ));
    }
    let json = serde_json::to_string_pretty(file)
        .map_err(|e| Error::Format(format!("model serialization failed: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

/// Load a model file, checking the format version and dual invariants.
pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::IncompatibleModel(format!("{}: {e}", path.display())))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::IncompatibleModel(format!(
            "{}: format version {} (this build reads {})",
            path.display(),
            file.format_version,
            MODEL_FORMAT_VERSION
        )));
    }
    file.model.validate()?;
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{train_one_class, TrainConfig};
    use crate::features::{FeatureLayout, Side};
    use rand::{Rng, SeedableRng};

    fn trained() -> ModelFile {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let rows: Vec<Vec<f64>> =
            (0..30).map(|_| (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let layout = FeatureLayout { mode: FeatureMode::Mfcc, side: Side::Left };
        let model = train_one_class(&rows, 0.2, layout, &TrainConfig::default()).unwrap();
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            preprocessing: PreprocessConfig::from_segment(
                &SegmentConfig::default(),
                FeatureMode::Mfcc,
            ),
            model,
        }
    }

    #[test]
    fn round_trip_preserves_decision_scores() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let file = trained();
        save_model(&file, &path).unwrap();
        let loaded = load_model(&path).unwrap();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let probe: Vec<f64> = (0..40).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let a = file.model.score(&probe).unwrap();
            let b = loaded.model.score(&probe).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(loaded.preprocessing, file.preprocessing);
    }

    #[test]
    fn truncated_file_is_incompatible() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&trained(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::IncompatibleModel(_))));
    }

    #[test]
    fn version_mismatch_is_incompatible() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut file = trained();
        save_model(&file, &path).unwrap();
        file.format_version = 99;
        let json = serde_json::to_string(&file).unwrap();
        std::fs::write(&path, json).unwrap();
        assert!(matches!(load_model(&path), Err(Error::IncompatibleModel(_))));
    }

    #[test]
    fn model_without_support_vectors_rejected_at_save() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut file = trained();
        file.model.support_vectors.clear();
        file.model.dual_coefs.clear();
        assert!(save_model(&file, &path).is_err());
        assert!(!path.exists());
    }
}
