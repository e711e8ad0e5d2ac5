use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::SampleBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBin {
    pub freq_hz: f64,
    pub magnitude: f64,
}

fn check_len(buffer: &SampleBuffer, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("transform length must be at least 2, got {n}")));
    }
    if n > buffer.len() {
        return Err(Error::invalid(format!("transform length {n} exceeds buffer length {}", buffer.len())));
    }
    Ok(())
}

/// Magnitudes of all `n` DFT bins of the first `n` samples (rectangular window).
pub fn dft_magnitudes(buffer: &SampleBuffer, n: usize) -> Result<Vec<f64>> {
    check_len(buffer, n)?;
    let mut data: Vec<Complex<f64>> = buffer.samples()[..n].iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut data);
    Ok(data.iter().map(|c| c.norm()).collect())
}

/// One-sided magnitude spectrum: bins `0..=n/2` at `k·fs/n` Hz.
pub fn spectrum(buffer: &SampleBuffer, n: usize) -> Result<Vec<SpectrumBin>> {
    let mags = dft_magnitudes(buffer, n)?;
    let fs = buffer.sample_rate_hz();
    Ok(mags
        .into_iter()
        .take(n / 2 + 1)
        .enumerate()
        .map(|(k, magnitude)| SpectrumBin { freq_hz: k as f64 * fs / n as f64, magnitude })
        .collect())
}

/// The bin with the largest magnitude (lowest frequency on ties).
pub fn peak_bin(bins: &[SpectrumBin]) -> Option<SpectrumBin> {
    bins.iter().copied().fold(None, |best, b| match best {
        Some(p) if p.magnitude >= b.magnitude => Some(p),
        _ => Some(b),
    })
}
