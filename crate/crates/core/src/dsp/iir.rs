use super::{FilterDesign, SampleBuffer};
use crate::error::{Error, Result};

/// Coefficients of the direct-form difference equation
///
/// ```text
/// y[n] = −Σ_{k=1..N} a_k·y[n−k] + Σ_{k=0..M} b_k·x[n−k]
/// ```
///
/// `feedback` holds `a_1..a_N` (empty for an FIR filter) and `feedforward`
/// holds `b_0..b_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct IirSpec {
    pub feedback: Vec<f64>,
    pub feedforward: Vec<f64>,
}

impl IirSpec {
    pub fn new(feedback: Vec<f64>, feedforward: Vec<f64>) -> Self {
        Self { feedback, feedforward }
    }

    /// The first-order high-pass rearranged into general form:
    /// `a_1 = −α`, `b_0 = α`, `b_1 = −α`.
    pub fn from_highpass(design: &FilterDesign) -> Self {
        let a = design.alpha();
        Self::new(vec![-a], vec![a, -a])
    }

    fn validate(&self) -> Result<()> {
        if self.feedforward.is_empty() {
            return Err(Error::invalid("feedforward needs at least b_0"));
        }
        if self.feedback.iter().chain(&self.feedforward).any(|c| !c.is_finite()) {
            return Err(Error::invalid("IIR coefficients must be finite"));
        }
        Ok(())
    }
}

/// Evaluates the difference equation over `buffer` from zero initial conditions.
pub fn iir_apply(spec: &IirSpec, buffer: &SampleBuffer) -> Result<SampleBuffer> {
    spec.validate()?;
    let x = buffer.samples();
    let mut y = Vec::with_capacity(x.len());
    for n in 0..x.len() {
        let mut acc = 0.0;
        for (k, b) in spec.feedforward.iter().enumerate().take(n + 1) {
            acc += b * x[n - k];
        }
        for (k, a) in spec.feedback.iter().enumerate().take(n) {
            acc -= a * y[n - 1 - k];
        }
        y.push(acc);
    }
    SampleBuffer::new(y, buffer.sample_rate_hz())
}
