//! Deployment cost model: energy and latency of one identification.
//!
//! Three schemes: run everything on the earbud, ship raw audio to a remote
//! classifier, or extract features locally and ship those. The default
//! stage table holds measured per-stage power (mW, above idle) and latency
//! (ms) for a prototype device; the table can be overridden to model other
//! hardware.
//!
//! Conventions (they make the default-table totals self-consistent):
//! device energy accrues while the radio writes into the TX buffer but not
//! during over-the-air time, which only adds latency; KB means 1000 bytes
//! and Mbps means 10^6 bits/s.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsp::CYCLE_LEN;
use crate::error::{Error, Result};
use crate::features::FeatureMode;

/// One pipeline stage: additional power draw above idle and how long the
/// stage runs. Energy contribution is `power_mw * latency_ms / 1000` mJ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCost {
    pub name: String,
    pub power_mw: f64,
    pub latency_ms: f64,
}

impl StageCost {
    pub fn energy_mj(&self) -> f64 {
        self.power_mw * self.latency_ms / 1000.0
    }
}

/// Radio link used for offloading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Wifi,
    Bt,
}

impl Link {
    /// Nominal uplink throughput, bits per second.
    pub fn throughput_bps(self) -> f64 {
        match self {
            Link::Wifi => 10e6,
            Link::Bt => 1e6,
        }
    }
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Link::Wifi => write!(f, "wifi"),
            Link::Bt => write!(f, "bt"),
        }
    }
}

/// Deployment scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    OnDevice,
    RawOffload,
    FeatureOffload,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::OnDevice => write!(f, "on-device"),
            Scheme::RawOffload => write!(f, "raw-offload"),
            Scheme::FeatureOffload => write!(f, "feature-offload"),
        }
    }
}

/// Cost estimate of one identification under a scheme.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeEstimate {
    pub scheme: Scheme,
    pub link: Option<Link>,
    pub feature_mode: Option<FeatureMode>,
    /// Device energy for one gait cycle, mJ.
    pub energy_mj: f64,
    /// Latency after data acquisition (the 1 s of microphone recording), ms.
    pub latency_ms: f64,
    /// Total latency including the recording second, ms.
    pub latency_with_recording_ms: f64,
    pub breakdown: Vec<StageCost>,
    /// Caveats about the default table (payload/air-time inconsistencies).
    pub notes: Vec<String>,
}

/// Named stage costs; starts from [`default_stage_table`] and can be
/// partially overridden.
pub type StageTable = BTreeMap<String, StageCost>;

pub const STAGE_MIC: &str = "mic_record";
pub const STAGE_LOWPASS: &str = "lowpass_filter";
pub const STAGE_FEAT_ALL: &str = "feature_extract_all";
pub const STAGE_FEAT_MFCC: &str = "feature_extract_mfcc";
pub const STAGE_INFERENCE: &str = "inference";

fn tx_stage_names(scheme: Scheme, link: Link, mode: FeatureMode) -> (String, String) {
    let payload = match scheme {
        Scheme::RawOffload => "raw".to_string(),
        Scheme::FeatureOffload => format!("features_{}", feature_tag(mode)),
        Scheme::OnDevice => unreachable!("on-device has no TX stage"),
    };
    (format!("tx_os_{payload}_{link}"), format!("tx_air_{payload}_{link}"))
}

fn feature_tag(mode: FeatureMode) -> &'static str {
    match mode {
        FeatureMode::Mfcc => "mfcc",
        // The reduced no-tonnetz vector is not in the measured table; its
        // payload matches "all" closely enough that callers model it there.
        FeatureMode::All | FeatureMode::NoTonnetz => "all",
    }
}

/// Measured default stage table for the reference prototype.
pub fn default_stage_table() -> StageTable {
    let entries = [
        (STAGE_MIC, 120.0, 1000.0),
        (STAGE_LOWPASS, 635.0, 1.83),
        (STAGE_FEAT_ALL, 655.0, 71.98),
        (STAGE_FEAT_MFCC, 651.0, 23.62),
        (STAGE_INFERENCE, 644.0, 0.44),
        ("tx_os_raw_wifi", 334.0, 9.49),
        ("tx_air_raw_wifi", 0.0, 12.8),
        ("tx_os_raw_bt", 478.0, 148.41),
        ("tx_air_raw_bt", 0.0, 128.0),
        ("tx_os_features_all_wifi", 332.0, 1.81),
        ("tx_air_features_all_wifi", 0.0, 0.59),
        ("tx_os_features_all_bt", 457.0, 8.66),
        ("tx_air_features_all_bt", 0.0, 5.94),
        ("tx_os_features_mfcc_wifi", 332.0, 0.39),
        ("tx_air_features_mfcc_wifi", 0.0, 0.26),
        ("tx_os_features_mfcc_bt", 457.0, 5.74),
        ("tx_air_features_mfcc_bt", 0.0, 2.56),
    ];
    entries
        .into_iter()
        .map(|(name, power_mw, latency_ms)| {
            (name.to_string(), StageCost { name: name.to_string(), power_mw, latency_ms })
        })
        .collect()
}

/// Over-the-air transmission time in milliseconds.
pub fn tx_air_time_ms(payload_bytes: f64, throughput_bps: f64) -> Result<f64> {
    if !(throughput_bps > 0.0) {
        return Err(Error::Parameter(format!(
            "throughput must be positive, got {throughput_bps}"
        )));
    }
    if payload_bytes < 0.0 {
        return Err(Error::Parameter("payload must be non-negative".into()));
    }
    Ok(payload_bytes * 8.0 / throughput_bps * 1000.0)
}

/// Payload of one cycle's raw audio from both ears, bytes (16-bit samples).
pub fn raw_payload_bytes() -> f64 {
    (2 * CYCLE_LEN * 2) as f64
}

/// Payload of one cycle's features from both ears, bytes (2-byte values).
pub fn feature_payload_bytes(mode: FeatureMode) -> f64 {
    (2 * mode.per_ear_len() * 2) as f64
}

fn lookup(table: &StageTable, name: &str) -> Result<StageCost> {
    table.get(name).cloned().ok_or_else(|| Error::MissingStage(name.to_string()))
}

/// Estimate energy and latency for one identification.
///
/// `link` is required for the offloading schemes and ignored on-device;
/// `feature_mode` selects which extraction stage and feature payload apply.
pub fn estimate(
    scheme: Scheme,
    link: Option<Link>,
    feature_mode: FeatureMode,
    table: &StageTable,
) -> Result<SchemeEstimate> {
    let feat_stage = match feature_mode {
        FeatureMode::Mfcc => STAGE_FEAT_MFCC,
        FeatureMode::All | FeatureMode::NoTonnetz => STAGE_FEAT_ALL,
    };
    let mut notes = Vec::new();

    let mic = lookup(table, STAGE_MIC)?;
    let mut powered = vec![mic];
    let mut air: Option<StageCost> = None;

    match scheme {
        Scheme::OnDevice => {
            powered.push(lookup(table, STAGE_LOWPASS)?);
            powered.push(lookup(table, feat_stage)?);
            powered.push(lookup(table, STAGE_INFERENCE)?);
        }
        Scheme::RawOffload | Scheme::FeatureOffload => {
            let link = link.ok_or_else(|| {
                Error::Parameter(format!("scheme {scheme} needs a link (wifi or bt)"))
            })?;
            if scheme == Scheme::FeatureOffload {
                powered.push(lookup(table, STAGE_LOWPASS)?);
                powered.push(lookup(table, feat_stage)?);
            }
            let (os_name, air_name) = tx_stage_names(scheme, link, feature_mode);
            powered.push(lookup(table, &os_name)?);
            let air_stage = lookup(table, &air_name)?;

            let payload = match scheme {
                Scheme::RawOffload => raw_payload_bytes(),
                _ => feature_payload_bytes(feature_mode),
            };
            let computed_air = tx_air_time_ms(payload, link.throughput_bps())?;
            if computed_air > 0.0
                && ((air_stage.latency_ms - computed_air) / computed_air).abs() > 0.05
            {
                notes.push(format!(
                    "table air time {} ms for {} differs from the {:.2} ms implied by the \
                     {payload} B payload at {} bps (ratio {:.2}); table value used",
                    air_stage.latency_ms,
                    air_name,
                    computed_air,
                    link.throughput_bps(),
                    air_stage.latency_ms / computed_air,
                ));
            }
            air = Some(air_stage);
        }
    }

    let energy_mj: f64 = powered.iter().map(StageCost::energy_mj).sum();
    let mut breakdown = powered;
    if let Some(air_stage) = air {
        breakdown.push(air_stage);
    }
    let total_latency: f64 = breakdown.iter().map(|s| s.latency_ms).sum();
    let mic_latency = breakdown[0].latency_ms;

    Ok(SchemeEstimate {
        scheme,
        link,
        feature_mode: Some(feature_mode),
        energy_mj,
        latency_ms: total_latency - mic_latency,
        latency_with_recording_ms: total_latency,
        breakdown,
        notes,
    })
}
