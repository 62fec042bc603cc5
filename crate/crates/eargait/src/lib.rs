//! Acoustic gait identification from in-ear microphone recordings.
//!
//! Walking excites low-frequency, bone-conducted vibrations that an in-ear
//! facing microphone picks up strongly (the occluded ear canal boosts them).
//! This crate turns such recordings into identity decisions:
//!
//! 1. [`dsp`] — downsample to 4 kHz, 50 Hz zero-phase lowpass, Hilbert
//!    envelopes smoothed at 3 Hz, peak-paired step detection, and resampling
//!    of each two-step gait cycle to exactly 4,000 samples.
//! 2. [`features`] — per-cycle acoustic descriptors (MFCC, chroma, mel
//!    spectrogram, RMS energy, tonnetz), 187 values per ear, 374 fused.
//! 3. [`classify`] — one-class and two-class RBF SVMs trained with an
//!    SMO-style dual solver; accept/reject decisions with scores.
//! 4. [`evaluate`] — FAR/FRR/BAC metrics and the four train/test protocols
//!    (one-class, imbalanced binary, balanced-all, balanced-5), plus
//!    training-size and per-condition sweeps.
//! 5. [`cost`] — energy/latency estimates for on-device identification,
//!    raw-audio offloading, and feature offloading over WiFi or BT.
//! 6. [`synth`] — a parametric gait-signal generator with exact ground
//!    truth, used as the oracle for the whole pipeline.
//!
//! The `eargait` binary exposes every stage as a subcommand (`synth`,
//! `segment`, `featurize`, `enroll`, `identify`, `evaluate`, `cost`) wired
//! together through files, so each stage is reproducible and testable in
//! isolation. All randomness flows from explicit seeds; identical inputs
//! produce identical outputs.

pub mod classify;
pub mod clip;
pub mod cost;
pub mod dataio;
pub mod dsp;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod fft;
pub mod pipeline;
pub mod synth;

pub use clip::{AudioClip, Channel};
pub use error::{Error, Result};
