//! RIFF/WAVE sound files.

use super::ExtractError;
use crate::model::{TemporalKind, TemporalPayload};

const PCM: u16 = 1;

pub fn is_wave(bytes: &[u8]) -> bool {
    bytes.len() >= 12 && &bytes[0..4] == b"RIFF" && &bytes[8..12] == b"WAVE"
}

struct Format {
    tag: u16,
    sample_rate: u32,
    byte_rate: u32,
}

/// Reads the `fmt ` and `data` chunks of a PCM WAV file. The sound is
/// described by `descriptor` (usually the file name).
pub fn extract_temporal(
    bytes: &[u8],
    descriptor: Option<&str>,
) -> Result<TemporalPayload, ExtractError> {
    if bytes.len() < 12 {
        return Err(ExtractError::TruncatedHeader);
    }
    if !is_wave(bytes) {
        return Err(ExtractError::UnsupportedAudioFormat);
    }

    let mut format = None;
    let mut data_len = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let len = u32::from_le_bytes(bytes[at + 4..at + 8].try_into().unwrap()) as usize;
        let body = at + 8;
        let available = bytes.len() - body;
        match id {
            b"fmt " => {
                if len < 16 || available < 16 {
                    return Err(ExtractError::TruncatedHeader);
                }
                let f = &bytes[body..];
                format = Some(Format {
                    tag: u16::from_le_bytes([f[0], f[1]]),
                    sample_rate: u32::from_le_bytes(f[4..8].try_into().unwrap()),
                    byte_rate: u32::from_le_bytes(f[8..12].try_into().unwrap()),
                });
            }
            // Streamed files may declare more data than they hold.
            b"data" => data_len = Some(len.min(available)),
            _ => {}
        }
        if format.is_some() && data_len.is_some() {
            break;
        }
        // Chunks are padded to even length.
        at = body.saturating_add(len).saturating_add(len & 1);
    }

    let format = format.ok_or_else(|| ExtractError::MissingChunk("fmt ".to_string()))?;
    let data_len = data_len.ok_or_else(|| ExtractError::MissingChunk("data".to_string()))?;
    if format.tag != PCM {
        return Err(ExtractError::UnsupportedCodec(format.tag));
    }
    if format.sample_rate == 0 {
        return Err(ExtractError::InvalidField("sample rate"));
    }
    if format.byte_rate == 0 {
        return Err(ExtractError::InvalidField("byte rate"));
    }
    let seconds = data_len as f64 / f64::from(format.byte_rate);
    Ok(TemporalPayload {
        duration: Some((seconds * 1000.0).round() / 1000.0),
        speed: Some(f64::from(format.sample_rate)),
        kind: TemporalKind::Sound(descriptor.map(str::to_string)),
    })
}
