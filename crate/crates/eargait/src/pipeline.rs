//! End-to-end glue: manifest on disk -> segmented cycles -> feature dataset.
//!
//! Used by the `evaluate` subcommand and by integration tests; sessions are
//! processed in parallel and assembled in manifest order, so results do not
//! depend on scheduling.

use std::path::Path;

use rayon::prelude::*;

use crate::clip::Channel;
use crate::dataio::manifest::{load_manifest, Footwear, Ground, SessionRecord};
use crate::dataio::wav::read_wav;
use crate::dsp::{segment, GaitCycle, Provenance, SegmentConfig};
use crate::error::{Error, Result};
use crate::evaluate::{Dataset, FeatureItem, SubjectData};
use crate::features::{featurize, FeatureLayout, FeatureMode, Side};

/// Features extracted from one session, with its condition tags.
#[derive(Debug, Clone)]
pub struct SessionFeatures {
    pub record: SessionRecord,
    pub rows: Vec<Vec<f64>>,
    /// Cycles recovered per ear before fusion pairing, for diagnostics.
    pub left_cycles: usize,
    pub right_cycles: usize,
}

fn read_side(base: &Path, rel: &str, expect: Channel) -> Result<crate::clip::AudioClip> {
    let path = base.join(rel);
    let clips = read_wav(&path)?;
    // Mono files carry the channel in the manifest, not in the container.
    let mut clip = clips
        .into_iter()
        .next()
        .ok_or_else(|| Error::Format(format!("{}: no audio data", path.display())))?;
    clip.channel = expect;
    Ok(clip)
}

/// Segment both ears of a session and featurize its cycles.
pub fn session_features(
    base_dir: &Path,
    record: &SessionRecord,
    seg_cfg: &SegmentConfig,
    mode: FeatureMode,
    fusion: Side,
) -> Result<SessionFeatures> {
    let origin = Provenance {
        subject_id: record.subject_id.clone(),
        session_id: record.session_id.clone(),
    };
    let segment_side = |rel: &str, ch: Channel| -> Result<Vec<GaitCycle>> {
        let clip = read_side(base_dir, rel, ch)?;
        Ok(segment(&clip, seg_cfg, &origin)?.cycles)
    };

    let (left, right) = match fusion {
        Side::Left => (segment_side(&record.left_path, Channel::Left)?, Vec::new()),
        Side::Right => (Vec::new(), segment_side(&record.right_path, Channel::Right)?),
        Side::Fused => (
            segment_side(&record.left_path, Channel::Left)?,
            segment_side(&record.right_path, Channel::Right)?,
        ),
    };

    let rows: Vec<Vec<f64>> = match fusion {
        Side::Left => left.iter().map(|c| featurize(c, None, mode).map(|v| v.values)).collect::<Result<_>>()?,
        Side::Right => right.iter().map(|c| featurize(c, None, mode).map(|v| v.values)).collect::<Result<_>>()?,
        Side::Fused => {
            // The ears are segmented independently; pair cycles index-wise
            // and drop the tail of the longer side.
            let n = left.len().min(right.len());
            left[..n]
                .iter()
                .zip(&right[..n])
                .map(|(l, r)| featurize(l, Some(r), mode).map(|v| v.values))
                .collect::<Result<_>>()?
        }
    };

    Ok(SessionFeatures {
        record: record.clone(),
        rows,
        left_cycles: left.len(),
        right_cycles: right.len(),
    })
}

/// A corpus converted to feature space, overall and per condition.
#[derive(Debug, Clone)]
pub struct CorpusFeatures {
    pub dataset: Dataset,
    pub by_condition: Vec<((Ground, Footwear), Dataset)>,
    pub sessions: Vec<SessionFeatures>,
}

/// Load a manifest and run the full pipeline on every session.
pub fn load_corpus(
    manifest_path: &Path,
    seg_cfg: &SegmentConfig,
    mode: FeatureMode,
    fusion: Side,
) -> Result<CorpusFeatures> {
    let records = load_manifest(manifest_path)?;
    if records.is_empty() {
        return Err(Error::Sizing(format!("{}: empty manifest", manifest_path.display())));
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let sessions: Vec<SessionFeatures> = records
        .par_iter()
        .map(|r| session_features(base, r, seg_cfg, mode, fusion))
        .collect::<Result<Vec<_>>>()?;

    let layout = FeatureLayout { mode, side: fusion };
    let mut subjects: Vec<SubjectData> = Vec::new();
    let mut by_condition: Vec<((Ground, Footwear), Vec<SubjectData>)> = Vec::new();
    for session in &sessions {
        let items: Vec<FeatureItem> = session
            .rows
            .iter()
            .map(|v| FeatureItem {
                session_id: session.record.session_id.clone(),
                values: v.clone(),
            })
            .collect();
        push_items(&mut subjects, &session.record.subject_id, &items);
        let condition = (session.record.ground, session.record.footwear);
        match by_condition.iter_mut().find(|(c, _)| *c == condition) {
            Some((_, subs)) => push_items(subs, &session.record.subject_id, &items),
            None => {
                let mut subs = Vec::new();
                push_items(&mut subs, &session.record.subject_id, &items);
                by_condition.push((condition, subs));
            }
        }
    }
    subjects.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let by_condition = by_condition
        .into_iter()
        .map(|(c, mut subs)| {
            subs.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
            (c, Dataset { layout, subjects: subs })
        })
        .collect();

    Ok(CorpusFeatures { dataset: Dataset { layout, subjects }, by_condition, sessions })
}

fn push_items(subjects: &mut Vec<SubjectData>, subject_id: &str, items: &[FeatureItem]) {
    match subjects.iter_mut().find(|s| s.subject_id == subject_id) {
        Some(s) => s.items.extend(items.iter().cloned()),
        None => subjects.push(SubjectData {
            subject_id: subject_id.to_string(),
            items: items.to_vec(),
        }),
    }
}
