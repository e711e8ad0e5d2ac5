//! External formats: PCM16 WAV, the framed chunk protocol, CSV tables and
//! the capture-link budget.

mod budget;
mod crc;
mod csv;
mod frame;
mod wav;

pub use budget::{link_budget, Framing, LinkBudget};
pub use crc::{crc16_ccitt_false, crc16_update};
pub use csv::{
    annotations_export, annotations_import, csv_export, csv_import, events_export, samples_export, spectrum_export,
};
pub use frame::{
    frame_decode, frame_decode_stream, frame_encode, frame_len, raw_pcm_read, ChunkFrame, DecodeEvent, DiscardReason,
    FrameDecoder, DEFAULT_MAX_SAMPLES,
};
pub use wav::{parse_wav, quantize, wav_read, wav_write};
