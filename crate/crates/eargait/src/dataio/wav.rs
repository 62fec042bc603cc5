//! Minimal RIFF/WAVE reader and writer.
//!
//! Reads 16-bit PCM and 32-bit IEEE-float files with one or two channels;
//! writes canonical 16-bit PCM. Amplitudes are normalized to [-1, 1] with
//! the 1/32768 convention, so a write/read round trip is exact up to one
//! quantization step.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::clip::{AudioClip, Channel};
use crate::error::{Error, Result};

const PCM_SCALE: f64 = 32768.0;

fn u16_le(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn u32_le(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Read a WAV file. Mono files yield one clip tagged left; stereo files
/// yield two clips, channel 0 as left and channel 1 as right.
pub fn read_wav(path: &Path) -> Result<Vec<AudioClip>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format(format!("{}: not a RIFF/WAVE file", path.display())));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_le(&bytes[pos + 4..pos + 8]) as usize;
        let body_end = pos + 8 + size;
        if body_end > bytes.len() {
            return Err(Error::Format(format!(
                "{}: chunk '{}' overruns file",
                path.display(),
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[pos + 8..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Format(format!("{}: fmt chunk too short", path.display())));
                }
                fmt = Some((u16_le(&body[0..2]), u16_le(&body[2..4]), u32_le(&body[4..8]), u16_le(&body[14..16])));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned.
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| Error::Format(format!("{}: missing fmt chunk", path.display())))?;
    let data = data.ok_or_else(|| Error::Format(format!("{}: missing data chunk", path.display())))?;
    if rate == 0 {
        return Err(Error::Format(format!("{}: zero sample rate", path.display())));
    }
    if !(1..=2).contains(&channels) {
        return Err(Error::Unsupported(format!(
            "{}: {channels} channels (only mono and stereo are supported)",
            path.display()
        )));
    }

    let interleaved: Vec<f64> = match (format, bits) {
        (1, 16) => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / PCM_SCALE)
            .collect(),
        (3, 32) => {
            let mut out = Vec::with_capacity(data.len() / 4);
            for c in data.chunks_exact(4) {
                let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
                if !v.is_finite() {
                    return Err(Error::Format(format!(
                        "{}: non-finite float sample",
                        path.display()
                    )));
                }
                out.push(v.clamp(-1.0, 1.0));
            }
            out
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "{}: format tag {format} with {bits} bits (expect 16-bit PCM or 32-bit float)",
                path.display()
            )))
        }
    };

    let channels = channels as usize;
    let per_channel = interleaved.len() / channels;
    let mut clips = Vec::with_capacity(channels);
    for (ch, tag) in [Channel::Left, Channel::Right].iter().enumerate().take(channels) {
        let samples: Vec<f64> =
            (0..per_channel).map(|i| interleaved[i * channels + ch]).collect();
        clips.push(AudioClip::new(samples, rate, *tag)?);
    }
    Ok(clips)
}

/// Write clips as a 16-bit PCM WAV file. One clip gives a mono file; two
/// clips (same rate and length) give a stereo file, left as channel 0.
pub fn write_wav(path: &Path, clips: &[&AudioClip]) -> Result<()> {
    if clips.is_empty() || clips.len() > 2 {
        return Err(Error::Parameter("write_wav takes one or two clips".into()));
    }
    let rate = clips[0].sample_rate;
    let len = clips[0].len();
    if clips.iter().any(|c| c.sample_rate != rate || c.len() != len) {
        return Err(Error::Parameter(
            "clips for a stereo file must share sample rate and length".into(),
        ));
    }
    let channels = clips.len() as u16;
    let data_len = (len * clips.len() * 2) as u32;

    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * channels as u32 * 2).to_le_bytes());
    out.extend_from_slice(&(channels * 2).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for i in 0..len {
        for clip in clips {
            let q = (clip.samples[i] * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16;
            out.extend_from_slice(&q.to_le_bytes());
        }
    }

    let mut f = fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}
