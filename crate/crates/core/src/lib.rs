//! Ultrasonic leak detection on a PCM sample stream.
//!
//! The pipeline is a first-order high-pass (`y[n] = α·(y[n−1] + x[n] − x[n−1])`)
//! that strips audible-band noise, followed by windowed RMS of what remains
//! and a baseline-relative threshold detector. Around it sit a seeded scene
//! generator for testing, bit-exact WAV and framed-serial codecs, and a
//! throughput check for the capture link.
//!
//! ```
//! use ultraleak::dsp::{design_highpass, windowed_rms};
//! use ultraleak::synth::{compose_scene, Scene};
//! use ultraleak::detector::{detect, score, DetectorConfig};
//!
//! let (signal, truth) = compose_scene(&Scene::leak_protocol(42)).unwrap();
//! let design = design_highpass(20_000.0, 62_500.0).unwrap();
//! let reports = windowed_rms(&design, &signal, 200.0).unwrap();
//! let events = detect(&reports, &DetectorConfig::default()).unwrap();
//! assert_eq!(score(&events, &truth).true_positives, 1);
//! ```

pub mod detector;
pub mod dsp;
mod error;
pub mod stream;
pub mod synth;

pub use error::{Error, Result};

/// Defaults for the reference rig, used by the command line.
pub mod defaults {
    pub const SAMPLE_RATE_HZ: f64 = 62_500.0;
    pub const CUTOFF_HZ: f64 = 20_000.0;
    pub const WINDOW_MS: f64 = 200.0;
    pub const CHUNK_SAMPLES: usize = 62_500;
    pub const BAUD: f64 = 921_600.0;
}
