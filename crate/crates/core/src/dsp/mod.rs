//! Deterministic signal kernels: high-pass design and filtering, a general
//! IIR evaluator, RMS and windowed RMS, and a magnitude spectrum.
//!
//! All arithmetic is `f64`. Filter state is an explicit value so a stream
//! can be processed in chunks without changing the result.

mod buffer;
mod highpass;
mod iir;
mod rms;
mod spectrum;

pub use buffer::SampleBuffer;
pub use highpass::{design_highpass, highpass_buffer, highpass_step, FilterDesign, FilterState};
pub use iir::{iir_apply, IirSpec};
pub use rms::{rms, window_len, windowed_rms, windowed_rms_unfiltered, RmsMeter, RmsReport};
pub use spectrum::{dft_magnitudes, peak_bin, spectrum, SpectrumBin};
