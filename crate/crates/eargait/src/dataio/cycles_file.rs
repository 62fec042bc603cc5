//! Gait cycles on disk: a flat binary blob of fixed-length f64 records plus
//! a JSON index carrying provenance, durations, and detected step times.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clip::Channel;
use crate::dsp::{GaitCycle, StepEvent, CYCLE_LEN};
use crate::error::{Error, Result};

/// Per-cycle metadata stored in the index, one entry per blob record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleMeta {
    pub subject_id: String,
    pub session_id: String,
    pub side: Channel,
    pub duration_s: f64,
}

/// Index accompanying a cycles blob.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleIndex {
    pub cycle_len: usize,
    pub sample_rate: u32,
    pub cycles: Vec<CycleMeta>,
    /// Detected step times per source clip, keyed by "subject/session/side".
    pub step_times_s: Vec<(String, Vec<f64>)>,
}

/// Write cycles as little-endian f64 records next to their JSON index.
pub fn write_cycles(
    blob_path: &Path,
    index_path: &Path,
    cycles: &[GaitCycle],
    sample_rate: u32,
    steps: &[(String, Vec<StepEvent>)],
) -> Result<()> {
    let mut blob = Vec::with_capacity(cycles.len() * CYCLE_LEN * 8);
    for c in cycles {
        if c.samples.len() != CYCLE_LEN {
            return Err(Error::Format(format!(
                "cycle of {} samples cannot be serialized (records are {CYCLE_LEN})",
                c.samples.len()
            )));
        }
        for &v in &c.samples {
            blob.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::File::create(blob_path)?.write_all(&blob)?;

    let index = CycleIndex {
        cycle_len: CYCLE_LEN,
        sample_rate,
        cycles: cycles
            .iter()
            .map(|c| CycleMeta {
                subject_id: c.subject_id.clone(),
                session_id: c.session_id.clone(),
                side: c.side,
                duration_s: c.duration_s,
            })
            .collect(),
        step_times_s: steps
            .iter()
            .map(|(key, evs)| (key.clone(), evs.iter().map(|e| e.time_s).collect()))
            .collect(),
    };
    let json = serde_json::to_string_pretty(&index)
        .map_err(|e| Error::Format(format!("index serialization failed: {e}")))?;
    fs::write(index_path, json)?;
    Ok(())
}

/// Read a cycles blob and its index back into [`GaitCycle`] values.
pub fn read_cycles(blob_path: &Path, index_path: &Path) -> Result<(Vec<GaitCycle>, CycleIndex)> {
    let index: CycleIndex = serde_json::from_str(&fs::read_to_string(index_path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", index_path.display())))?;
    if index.cycle_len != CYCLE_LEN {
        return Err(Error::Format(format!(
            "index records cycle_len {}, this build expects {CYCLE_LEN}",
            index.cycle_len
        )));
    }
    let blob = fs::read(blob_path)?;
    let expected = index.cycles.len() * CYCLE_LEN * 8;
    if blob.len() != expected {
        return Err(Error::Format(format!(
            "blob is {} bytes, index implies {expected}",
            blob.len()
        )));
    }
    let mut cycles = Vec::with_capacity(index.cycles.len());
    for (i, meta) in index.cycles.iter().enumerate() {
        let start = i * CYCLE_LEN * 8;
        let samples: Vec<f64> = blob[start..start + CYCLE_LEN * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        cycles.push(GaitCycle {
            samples,
            duration_s: meta.duration_s,
            subject_id: meta.subject_id.clone(),
            session_id: meta.session_id.clone(),
            side: meta.side,
        });
    }
    Ok((cycles, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(tag: f64, side: Channel) -> GaitCycle {
        GaitCycle {
            samples: (0..CYCLE_LEN).map(|i| tag + i as f64 * 1e-6).collect(),
            duration_s: 1.05,
            subject_id: "s00".into(),
            session_id: "sess0".into(),
            side,
        }
    }

    #[test]
    fn blob_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let blob = dir.path().join("cycles.f64");
        let index = dir.path().join("cycles.json");
        let cycles = vec![cycle(0.1, Channel::Left), cycle(-0.4, Channel::Right)];
        let steps = vec![(
            "s00/sess0/left".to_string(),
            vec![StepEvent { time_s: 0.5, upper_peak_idx: 2000, lower_peak_idx: 2000 }],
        )];
        write_cycles(&blob, &index, &cycles, 4000, &steps).unwrap();
        let (back, idx) = read_cycles(&blob, &index).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].samples, cycles[0].samples);
        assert_eq!(back[1].side, Channel::Right);
        assert_eq!(idx.step_times_s[0].1, vec![0.5]);
    }

    #[test]
    fn truncated_blob_detected() {
        let dir = tempfile::tempdir().unwrap();
        let blob = dir.path().join("cycles.f64");
        let index = dir.path().join("cycles.json");
        write_cycles(&blob, &index, &[cycle(0.3, Channel::Left)], 4000, &[]).unwrap();
        let bytes = fs::read(&blob).unwrap();
        fs::write(&blob, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_cycles(&blob, &index), Err(Error::Format(_))));
    }
}
