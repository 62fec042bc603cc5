//! Stable on-disk formats: WAV audio, JSONL manifests, cycle blobs,
//! feature matrices, model containers, and evaluation reports.
//!
//! Every read/write pair is lossless up to documented quantization (WAV is
//! 16-bit PCM; everything else stores f64 exactly). Readers are safe to
//! call concurrently on distinct paths and all returned values are
//! immutable.

pub mod cycles_file;
pub mod features_file;
pub mod manifest;
pub mod model_file;
pub mod wav;

pub use cycles_file::{read_cycles, write_cycles, CycleIndex, CycleMeta};
pub use features_file::{read_features, write_features, FeatureFile, FeatureRow};
pub use manifest::{load_manifest, save_manifest, Footwear, Ground, SessionRecord};
pub use model_file::{load_model, save_model, ModelFile, PreprocessConfig, MODEL_FORMAT_VERSION};
pub use wav::{read_wav, write_wav};
