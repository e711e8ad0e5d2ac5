//! Framed chunk protocol for the device→host sample link.
//!
//! ```text
//! offset  size        field
//! 0       2           magic 0xAA 0x55
//! 2       1           version 0x01
//! 3       4           seq      (LE u32)
//! 7       4           count    (LE u32, number of samples, ≥ 1)
//! 11      2·count     samples  (LE i16)
//! 11+2c   2           CRC-16/CCITT-FALSE over bytes 2..11+2c (LE u16)
//! ```
//!
//! [`FrameDecoder`] scans for the magic, validates the CRC and resumes one
//! byte after any rejected candidate, so every intact frame following a
//! corrupted region is recovered.

use std::io::Read;

use super::crc::crc16_ccitt_false;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 2] = [0xAA, 0x55];
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 11;
pub const TRAILER_LEN: usize = 2;
/// Default upper bound on `count`; larger candidates are treated as garbage.
pub const DEFAULT_MAX_SAMPLES: u32 = 1 << 17;

pub fn frame_len(count: usize) -> usize {
    HEADER_LEN + 2 * count + TRAILER_LEN
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkFrame {
    pub seq: u32,
    pub samples: Vec<i16>,
    pub checksum: u16,
}

impl ChunkFrame {
    pub fn new(seq: u32, samples: Vec<i16>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("a frame carries at least one sample"));
        }
        if u32::try_from(samples.len()).is_err() {
            return Err(Error::invalid("too many samples for one frame"));
        }
        let body = body_bytes(seq, &samples);
        let checksum = crc16_ccitt_false(&body);
        Ok(Self { seq, samples, checksum })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(frame_len(self.samples.len()));
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&body_bytes(self.seq, &self.samples));
        out.extend_from_slice(&self.checksum.to_le_bytes());
        out
    }
}

fn body_bytes(seq: u32, samples: &[i16]) -> Vec<u8> {
    let mut body = Vec::with_capacity(HEADER_LEN - 2 + 2 * samples.len());
    body.push(VERSION);
    body.extend_from_slice(&seq.to_le_bytes());
    body.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    for s in samples {
        body.extend_from_slice(&s.to_le_bytes());
    }
    body
}

pub fn frame_encode(seq: u32, samples: &[i16]) -> Result<Vec<u8>> {
    Ok(ChunkFrame::new(seq, samples.to_vec())?.to_bytes())
}

/// Decodes exactly one frame occupying all of `bytes`.
pub fn frame_decode(bytes: &[u8]) -> Result<ChunkFrame> {
    let mut dec = FrameDecoder::new();
    let mut events = dec.push(bytes);
    events.extend(dec.finish());
    match events.as_slice() {
        [DecodeEvent::Frame(f)] if frame_len(f.samples.len()) == bytes.len() => Ok(f.clone()),
        _ => Err(Error::invalid("bytes are not exactly one valid frame")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardReason {
    BadVersion(u8),
    BadCount(u32),
    BadCrc {
        expected: u16,
        found: u16,
    },
    /// Stream ended inside the candidate frame.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeEvent {
    Frame(ChunkFrame),
    /// Sequence discontinuity between consecutive accepted frames.
    Gap {
        expected: u32,
        found: u32,
    },
    /// A magic candidate at stream byte `offset` was rejected.
    Discarded {
        offset: u64,
        reason: DiscardReason,
    },
}

impl DecodeEvent {
    /// Number of frames missing for a [`DecodeEvent::Gap`] (modulo 2³²).
    pub fn missing_frames(&self) -> Option<u32> {
        match self {
            DecodeEvent::Gap { expected, found } => Some(found.wrapping_sub(*expected)),
            _ => None,
        }
    }
}

/// Incremental, resumable frame parser. Feed arbitrary byte chunks with
/// [`push`](Self::push) and call [`finish`](Self::finish) at end of stream.
#[derive(Debug, Clone)]
pub struct FrameDecoder {
    buf: Vec<u8>,
    pos: usize,
    /// Stream offset of `buf[0]`.
    base: u64,
    expected_seq: Option<u32>,
    max_samples: u32,
}

impl Default for FrameDecoder {
    fn default() -> Self {
        Self::new()
    }
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::with_max_samples(DEFAULT_MAX_SAMPLES)
    }

    pub fn with_max_samples(max_samples: u32) -> Self {
        Self { buf: Vec::new(), pos: 0, base: 0, expected_seq: None, max_samples: max_samples.max(1) }
    }

    pub fn push(&mut self, data: &[u8]) -> Vec<DecodeEvent> {
        self.buf.extend_from_slice(data);
        let mut events = Vec::new();
        self.scan(false, &mut events);
        self.compact();
        events
    }

    pub fn finish(mut self) -> Vec<DecodeEvent> {
        let mut events = Vec::new();
        self.scan(true, &mut events);
        events
    }

    fn scan(&mut self, at_end: bool, events: &mut Vec<DecodeEvent>) {
        loop {
            let Some(rel) = self.buf[self.pos..].windows(2).position(|w| w == MAGIC) else {
                // keep a trailing 0xAA that may start a split magic
                let keep = usize::from(!at_end && self.buf.last() == Some(&MAGIC[0]));
                self.pos = self.buf.len() - keep.min(self.buf.len() - self.pos);
                return;
            };
            let start = self.pos + rel;
            let offset = self.base + start as u64;
            let avail = self.buf.len() - start;

            if avail < HEADER_LEN {
                if at_end {
                    events.push(DecodeEvent::Discarded { offset, reason: DiscardReason::Truncated });
                    self.pos = start + 1;
                    continue;
                }
                self.pos = start;
                return;
            }
            let version = self.buf[start + 2];
            if version != VERSION {
                events.push(DecodeEvent::Discarded { offset, reason: DiscardReason::BadVersion(version) });
                self.pos = start + 1;
                continue;
            }
            let count = u32::from_le_bytes(self.buf[start + 7..start + 11].try_into().unwrap());
            if count == 0 || count > self.max_samples {
                events.push(DecodeEvent::Discarded { offset, reason: DiscardReason::BadCount(count) });
                self.pos = start + 1;
                continue;
            }
            let total = frame_len(count as usize);
            if avail < total {
                if at_end {
                    events.push(DecodeEvent::Discarded { offset, reason: DiscardReason::Truncated });
                    self.pos = start + 1;
                    continue;
                }
                self.pos = start;
                return;
            }
            let frame = &self.buf[start..start + total];
            let crc_at = total - TRAILER_LEN;
            let found = u16::from_le_bytes([frame[crc_at], frame[crc_at + 1]]);
            let expected = crc16_ccitt_false(&frame[2..crc_at]);
            if found != expected {
                events.push(DecodeEvent::Discarded { offset, reason: DiscardReason::BadCrc { expected, found } });
                self.pos = start + 1;
                continue;
            }
            let seq = u32::from_le_bytes(frame[3..7].try_into().unwrap());
            let samples = frame[HEADER_LEN..crc_at].chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect();
            if let Some(exp) = self.expected_seq {
                if seq != exp {
                    events.push(DecodeEvent::Gap { expected: exp, found: seq });
                }
            }
            self.expected_seq = Some(seq.wrapping_add(1));
            events.push(DecodeEvent::Frame(ChunkFrame { seq, samples, checksum: found }));
            self.pos = start + total;
        }
    }

    fn compact(&mut self) {
        if self.pos > 0 {
            self.buf.drain(..self.pos);
            self.base += self.pos as u64;
            self.pos = 0;
        }
    }
}

/// Decodes a whole byte stream, reading it in 64 KiB pieces.
pub fn frame_decode_stream<R: Read>(mut source: R) -> Result<Vec<DecodeEvent>> {
    let mut dec = FrameDecoder::new();
    let mut events = Vec::new();
    let mut chunk = vec![0u8; 1 << 16];
    loop {
        let n = match source.read(&mut chunk) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e.into()),
        };
        events.extend(dec.push(&chunk[..n]));
    }
    events.extend(dec.finish());
    Ok(events)
}

/// Reads a headerless little-endian i16 stream. A trailing odd byte is an error.
pub fn raw_pcm_read<R: Read>(mut source: R) -> Result<Vec<i16>> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    if bytes.len() % 2 != 0 {
        return Err(Error::TruncatedData { expected: bytes.len() + 1, found: bytes.len() });
    }
    Ok(bytes.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect())
}
