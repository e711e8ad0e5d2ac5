use crate::error::{require_positive, Error, Result};

/// A mono stream of samples nominally in the signed 16-bit PCM range, stored
/// as `f64`, together with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl SampleBuffer {
    /// Wraps `samples`. The sample rate must be positive and every sample finite.
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        require_positive("sample_rate_hz", sample_rate_hz)?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn empty(sample_rate_hz: f64) -> Result<Self> {
        Self::new(Vec::new(), sample_rate_hz)
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate_hz)
    }

    /// Converts integer PCM on ingest.
    pub fn from_pcm(pcm: &[i16], sample_rate_hz: f64) -> Result<Self> {
        Self::new(pcm.iter().map(|&s| f64::from(s)).collect(), sample_rate_hz)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Copies `range` into a new buffer at the same rate.
    pub fn slice(&self, range: std::ops::Range<usize>) -> SampleBuffer {
        SampleBuffer { samples: self.samples[range].to_vec(), sample_rate_hz: self.sample_rate_hz }
    }

    /// Appends another buffer recorded at the same rate.
    pub fn append(&mut self, other: &SampleBuffer) -> Result<()> {
        if other.sample_rate_hz != self.sample_rate_hz {
            return Err(Error::SampleRateMismatch { expected: self.sample_rate_hz, found: other.sample_rate_hz });
        }
        self.samples.extend_from_slice(&other.samples);
        Ok(())
    }
}
