//! First-order high-pass filter derived from the analog RC section.
//!
//! Discretizing `y = RC·(dx/dt − dy/dt)` with backward differences gives
//!
//! ```text
//! y[n] = α · (y[n−1] + x[n] − x[n−1]),   α = RC / (RC + Δt)
//! ```
//!
//! with `RC = 1/(2π·f_c)` and `Δt = 1/f_s`, i.e. `α = f_s / (f_s + 2π·f_c)`.
//! For `f_c = 20 kHz` at `f_s = 62.5 kHz` this gives `α ≈ 0.3322`.
//!
//! The digital −3 dB point does not sit exactly at `f_c`; use
//! [`FilterDesign::gain_at`] for the realized response.

use std::f64::consts::PI;

use super::SampleBuffer;
use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDesign {
    cutoff_hz: f64,
    sample_rate_hz: f64,
    alpha: f64,
}

impl FilterDesign {
    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Equivalent analog time constant `RC = 1/(2π·f_c)` in seconds.
    pub fn time_constant_s(&self) -> f64 {
        1.0 / (2.0 * PI * self.cutoff_hz)
    }

    /// Magnitude of `H(z) = α(1 − z⁻¹)/(1 − αz⁻¹)` on the unit circle at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        let a = self.alpha;
        let num = 2.0 * (w / 2.0).sin().abs();
        let den = (1.0 - 2.0 * a * w.cos() + a * a).sqrt();
        a * num / den
    }
}

/// Designs the high-pass coefficient for `cutoff_hz` at `sample_rate_hz`.
pub fn design_highpass(cutoff_hz: f64, sample_rate_hz: f64) -> Result<FilterDesign> {
    require_positive("cutoff_hz", cutoff_hz)?;
    require_positive("sample_rate_hz", sample_rate_hz)?;
    let alpha = sample_rate_hz / (sample_rate_hz + 2.0 * PI * cutoff_hz);
    Ok(FilterDesign { cutoff_hz, sample_rate_hz, alpha })
}

/// The `(x[n−1], y[n−1])` pair carried between samples and between chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FilterState {
    pub prev_input: f64,
    pub prev_output: f64,
}

impl FilterState {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn advance(&mut self, alpha: f64, x: f64) -> f64 {
        let y = alpha * (self.prev_output + x - self.prev_input);
        self.prev_input = x;
        self.prev_output = y;
        y
    }
}

pub fn highpass_step(design: &FilterDesign, state: FilterState, x: f64) -> Result<(FilterState, f64)> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("input sample {x} is not finite")));
    }
    let mut next = state;
    let y = next.advance(design.alpha, x);
    Ok((next, y))
}

/// Filters a whole buffer, threading `state` so that consecutive chunks
/// produce exactly the output of a single call over their concatenation.
pub fn highpass_buffer(
    design: &FilterDesign,
    state: FilterState,
    buffer: &SampleBuffer,
) -> Result<(FilterState, SampleBuffer)> {
    check_rate(design, buffer)?;
    let mut state = state;
    let out = buffer.samples().iter().map(|&x| state.advance(design.alpha, x)).collect();
    Ok((state, SampleBuffer::new(out, buffer.sample_rate_hz())?))
}

/// In-place variant used by the streaming meters.
pub(crate) fn highpass_in_place(alpha: f64, state: &mut FilterState, samples: &mut [f64]) {
    for s in samples {
        *s = state.advance(alpha, *s);
    }
}

pub(crate) fn check_rate(design: &FilterDesign, buffer: &SampleBuffer) -> Result<()> {
    if design.sample_rate_hz != buffer.sample_rate_hz() {
        return Err(Error::SampleRateMismatch { expected: design.sample_rate_hz, found: buffer.sample_rate_hz() });
    }
    Ok(())
}
