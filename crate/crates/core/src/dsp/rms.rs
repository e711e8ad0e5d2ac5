use super::highpass::{check_rate, highpass_in_place};
use super::{FilterDesign, FilterState, SampleBuffer};
use crate::error::{require_positive, Error, Result};

/// Root-mean-square of `values`.
///
/// Squares are taken after scaling by the largest magnitude, so a constant
/// input returns its magnitude exactly and large inputs cannot overflow.
pub fn rms(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = values
        .iter()
        .map(|v| {
            let s = v / peak;
            s * s
        })
        .sum();
    Ok(peak * (sum / values.len() as f64).sqrt())
}

/// One windowed RMS measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsReport {
    /// Stream time at the end of the window, in seconds.
    pub t_end_s: f64,
    pub rms: f64,
    pub n_samples: usize,
}

/// Window length in samples: `round(window_ms·fs/1000)`, ties away from zero.
pub fn window_len(window_ms: f64, sample_rate_hz: f64) -> Result<usize> {
    require_positive("window_ms", window_ms)?;
    require_positive("sample_rate_hz", sample_rate_hz)?;
    let n = (window_ms * sample_rate_hz / 1000.0).round();
    if n < 1.0 {
        return Err(Error::invalid(format!(
            "window of {window_ms} ms is shorter than one sample at {sample_rate_hz} Hz"
        )));
    }
    Ok(n as usize)
}

/// Streaming windowed RMS meter.
///
/// Samples are optionally high-passed with a single persistent
/// [`FilterState`], then cut into consecutive windows. Feeding a stream in
/// arbitrary chunks yields the same reports as feeding it at once.
#[derive(Debug, Clone)]
pub struct RmsMeter {
    filter: Option<(FilterDesign, FilterState)>,
    sample_rate_hz: f64,
    window: usize,
    pending: Vec<f64>,
    consumed: u64,
}

impl RmsMeter {
    /// Meter over high-pass filtered samples, starting from a fresh filter state.
    pub fn filtered(design: FilterDesign, window_ms: f64) -> Result<Self> {
        let fs = design.sample_rate_hz();
        let mut meter = Self::unfiltered(fs, window_ms)?;
        meter.filter = Some((design, FilterState::new()));
        Ok(meter)
    }

    /// Meter over the raw samples.
    pub fn unfiltered(sample_rate_hz: f64, window_ms: f64) -> Result<Self> {
        let window = window_len(window_ms, sample_rate_hz)?;
        Ok(Self { filter: None, sample_rate_hz, window, pending: Vec::with_capacity(window), consumed: 0 })
    }

    pub fn window_len(&self) -> usize {
        self.window
    }

    pub fn filter_state(&self) -> Option<FilterState> {
        self.filter.map(|(_, s)| s)
    }

    /// Consumes a chunk and returns every window it completes.
    pub fn push(&mut self, chunk: &SampleBuffer) -> Result<Vec<RmsReport>> {
        if chunk.sample_rate_hz() != self.sample_rate_hz {
            return Err(Error::SampleRateMismatch { expected: self.sample_rate_hz, found: chunk.sample_rate_hz() });
        }
        if let Some((design, _)) = &self.filter {
            check_rate(design, chunk)?;
        }
        let mut reports = Vec::new();
        let mut rest = chunk.samples();
        while !rest.is_empty() {
            let take = (self.window - self.pending.len()).min(rest.len());
            let start = self.pending.len();
            self.pending.extend_from_slice(&rest[..take]);
            if let Some((design, state)) = &mut self.filter {
                highpass_in_place(design.alpha(), state, &mut self.pending[start..]);
            }
            rest = &rest[take..];
            if self.pending.len() == self.window {
                reports.push(self.emit()?);
            }
        }
        Ok(reports)
    }

    /// Flushes the trailing partial window. It is reported only when it holds
    /// at least half a window of samples.
    pub fn finish(mut self) -> Result<Option<RmsReport>> {
        if !self.pending.is_empty() && 2 * self.pending.len() >= self.window {
            self.emit().map(Some)
        } else {
            Ok(None)
        }
    }

    fn emit(&mut self) -> Result<RmsReport> {
        let n = self.pending.len();
        let value = rms(&self.pending)?;
        self.consumed += n as u64;
        self.pending.clear();
        Ok(RmsReport { t_end_s: self.consumed as f64 / self.sample_rate_hz, rms: value, n_samples: n })
    }
}

/// High-passes `buffer` from a fresh state and reports the RMS of each
/// `window_ms` window.
pub fn windowed_rms(design: &FilterDesign, buffer: &SampleBuffer, window_ms: f64) -> Result<Vec<RmsReport>> {
    let meter = RmsMeter::filtered(*design, window_ms)?;
    run_meter(meter, buffer)
}

/// Same windowing as [`windowed_rms`] without the high-pass stage.
pub fn windowed_rms_unfiltered(buffer: &SampleBuffer, window_ms: f64) -> Result<Vec<RmsReport>> {
    let meter = RmsMeter::unfiltered(buffer.sample_rate_hz(), window_ms)?;
    run_meter(meter, buffer)
}

fn run_meter(mut meter: RmsMeter, buffer: &SampleBuffer) -> Result<Vec<RmsReport>> {
    if buffer.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut reports = meter.push(buffer)?;
    reports.extend(meter.finish()?);
    Ok(reports)
}
