//! Canonical PCM16 mono RIFF/WAVE.
//!
//! The writer always emits the 44-byte header layout; the reader accepts any
//! chunk order where `fmt ` precedes `data` and skips unknown chunks.

use std::io::{Read, Write};

use crate::dsp::SampleBuffer;
use crate::error::{Error, Result};

pub const HEADER_LEN: usize = 44;

/// Rounds to nearest (ties away from zero) and clamps to the i16 range.
pub fn quantize(sample: f64) -> i16 {
    sample.round().clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
}

fn sample_rate_u32(sample_rate_hz: f64) -> Result<u32> {
    if sample_rate_hz.fract() != 0.0 || sample_rate_hz < 1.0 || sample_rate_hz > f64::from(u32::MAX) {
        return Err(Error::invalid(format!("sample rate {sample_rate_hz} Hz is not representable in a WAV header")));
    }
    Ok(sample_rate_hz as u32)
}

/// Serializes `buffer` as PCM16 mono.
pub fn wav_write<W: Write>(buffer: &SampleBuffer, mut sink: W) -> Result<()> {
    let rate = sample_rate_u32(buffer.sample_rate_hz())?;
    let data_size = buffer
        .len()
        .checked_mul(2)
        .and_then(|d| u32::try_from(d).ok())
        .filter(|d| d.checked_add(36).is_some())
        .ok_or_else(|| Error::invalid("buffer too long for a WAV file"))?;

    let mut out = Vec::with_capacity(HEADER_LEN + data_size as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate.wrapping_mul(2)).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &s in buffer.samples() {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    sink.write_all(&out)?;
    sink.flush()?;
    Ok(())
}

fn malformed(field: &'static str, detail: impl Into<String>) -> Error {
    Error::MalformedHeader { field, detail: detail.into() }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Parses PCM16 mono WAVE bytes.
pub fn wav_read<R: Read>(mut source: R) -> Result<SampleBuffer> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    parse_wav(&bytes)
}

pub fn parse_wav(bytes: &[u8]) -> Result<SampleBuffer> {
    if bytes.len() < 12 {
        return Err(Error::TruncatedData { expected: 12, found: bytes.len() });
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed("riff_id", format!("expected \"RIFF\", found {:?}", &bytes[0..4])));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("wave_id", format!("expected \"WAVE\", found {:?}", &bytes[8..12])));
    }

    let mut sample_rate = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(malformed("fmt_size", format!("fmt chunk of {size} bytes, need 16")));
                }
                if body + 16 > bytes.len() {
                    return Err(Error::TruncatedData { expected: body + 16, found: bytes.len() });
                }
                let fmt = &bytes[body..body + 16];
                let format = u16_at(fmt, 0);
                if format != 1 {
                    return Err(malformed("audio_format", format!("{format} is not PCM (1)")));
                }
                let channels = u16_at(fmt, 2);
                if channels != 1 {
                    return Err(malformed("channels", format!("{channels} channels, only mono is supported")));
                }
                let rate = u32_at(fmt, 4);
                if rate == 0 {
                    return Err(malformed("sample_rate", "zero sample rate"));
                }
                let bits = u16_at(fmt, 14);
                if bits != 16 {
                    return Err(malformed("bits_per_sample", format!("{bits} bits, only 16 is supported")));
                }
                let align = u16_at(fmt, 12);
                if align != 2 {
                    return Err(malformed("block_align", format!("{align}, expected 2")));
                }
                sample_rate = Some(rate);
            }
            b"data" => {
                let rate = sample_rate.ok_or_else(|| malformed("fmt_chunk", "data chunk before fmt chunk"))?;
                if !size.is_multiple_of(2) {
                    return Err(malformed("data_size", format!("{size} is not a whole number of samples")));
                }
                if body + size > bytes.len() {
                    return Err(Error::TruncatedData { expected: body + size, found: bytes.len() });
                }
                let pcm: Vec<i16> =
                    bytes[body..body + size].chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect();
                return SampleBuffer::from_pcm(&pcm, f64::from(rate));
            }
            _ => {}
        }
        // chunks are padded to even length
        pos = body.saturating_add(size).saturating_add(size & 1);
    }
    match sample_rate {
        None => Err(malformed("fmt_chunk", "no fmt chunk")),
        Some(_) => Err(malformed("data_chunk", "no data chunk")),
    }
}
