//! Seeded test-signal generation: tones, shaped compressor noise, the
//! Strouhal leak-frequency model and multi-phase scenes with ground-truth
//! annotations.

mod rng;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub use rng::XorShift64Star;

use crate::dsp::SampleBuffer;
use crate::error::{require_positive, Error, Result};

pub const DEFAULT_NOISE_AMPLITUDE: f64 = 2000.0;
pub const DEFAULT_LEAK_AMPLITUDE: f64 = 400.0;
pub const DEFAULT_LEAK_FREQ_HZ: f64 = 26000.0;
/// Sensor self-noise present in every phase. Uniform ±40 high-passes to an
/// RMS of about 9.4, the quiescent level of a silent room.
pub const DEFAULT_FLOOR_AMPLITUDE: f64 = 40.0;

/// Jet-noise source: `f = k·v/d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakSourceSpec {
    /// Empirical proportionality coefficient `k`.
    pub k_coeff: f64,
    pub velocity_mps: f64,
    pub hole_diameter_m: f64,
}

pub fn strouhal_frequency(spec: &LeakSourceSpec) -> Result<f64> {
    require_positive("k_coeff", spec.k_coeff)?;
    require_positive("velocity_mps", spec.velocity_mps)?;
    require_positive("hole_diameter_m", spec.hole_diameter_m)?;
    Ok(spec.k_coeff * spec.velocity_mps / spec.hole_diameter_m)
}

fn sample_count(duration_s: f64, sample_rate_hz: f64) -> Result<usize> {
    require_positive("duration_s", duration_s)?;
    require_positive("sample_rate_hz", sample_rate_hz)?;
    Ok((duration_s * sample_rate_hz).round() as usize)
}

fn require_amplitude(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be nonnegative and finite, got {value}")))
    }
}

/// `amplitude·sin(2π·f·i/fs + phase)` for `round(duration·fs)` samples.
pub fn synth_tone(
    freq_hz: f64,
    amplitude: f64,
    sample_rate_hz: f64,
    duration_s: f64,
    phase_rad: f64,
) -> Result<SampleBuffer> {
    require_positive("freq_hz", freq_hz)?;
    require_amplitude("amplitude", amplitude)?;
    let n = sample_count(duration_s, sample_rate_hz)?;
    if freq_hz >= sample_rate_hz / 2.0 {
        return Err(Error::Aliasing { freq_hz, sample_rate_hz });
    }
    if !phase_rad.is_finite() {
        return Err(Error::invalid("phase_rad must be finite"));
    }
    let w = 2.0 * PI * freq_hz / sample_rate_hz;
    let samples = (0..n).map(|i| amplitude * (w * i as f64 + phase_rad).sin()).collect();
    SampleBuffer::new(samples, sample_rate_hz)
}

/// Spectral shape of the compressor noise: a cascade of `order` identical
/// one-pole low-pass sections `y[n] = y[n−1] + β(x[n] − y[n−1])`,
/// `β = Δt/(RC + Δt)`, `RC = 1/(2π·cutoff_hz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseShape {
    pub cutoff_hz: f64,
    pub order: u32,
}

impl Default for NoiseShape {
    fn default() -> Self {
        Self { cutoff_hz: 200.0, order: 2 }
    }
}

impl NoiseShape {
    fn beta(&self, sample_rate_hz: f64) -> f64 {
        let rc = 1.0 / (2.0 * PI * self.cutoff_hz);
        let dt = 1.0 / sample_rate_hz;
        dt / (rc + dt)
    }

    /// `sqrt(Σ h[n]²)` of the cascade impulse response, i.e. its RMS gain on white noise.
    fn white_noise_gain(&self, beta: f64) -> f64 {
        let mut stages = vec![0.0; self.order as usize];
        let len = (60.0 * f64::from(self.order) / beta).ceil() as usize;
        let mut energy = 0.0;
        for n in 0..len {
            let mut v = if n == 0 { 1.0 } else { 0.0 };
            for s in stages.iter_mut() {
                *s += beta * (v - *s);
                v = *s;
            }
            energy += v * v;
        }
        energy.sqrt()
    }
}

/// Seeded uniform white noise in `[−amplitude, amplitude)`, low-passed by
/// `shape` and rescaled so its RMS equals that of the unshaped source,
/// `amplitude/√3`. The cascade is run to steady state before the first
/// emitted sample so the output is stationary from the start.
pub fn synth_noise(
    amplitude: f64,
    shape: NoiseShape,
    sample_rate_hz: f64,
    duration_s: f64,
    seed: u64,
) -> Result<SampleBuffer> {
    let n = sample_count(duration_s, sample_rate_hz)?;
    let mut rng = XorShift64Star::new(seed);
    let samples = shaped_noise(&mut rng, amplitude, shape, sample_rate_hz, n)?;
    SampleBuffer::new(samples, sample_rate_hz)
}

fn shaped_noise(
    rng: &mut XorShift64Star,
    amplitude: f64,
    shape: NoiseShape,
    sample_rate_hz: f64,
    n: usize,
) -> Result<Vec<f64>> {
    require_amplitude("noise amplitude", amplitude)?;
    require_positive("lowpass_cutoff_hz", shape.cutoff_hz)?;
    if shape.cutoff_hz >= sample_rate_hz / 2.0 {
        return Err(Error::invalid(format!(
            "noise cutoff {} Hz is not below Nyquist ({} Hz)",
            shape.cutoff_hz,
            sample_rate_hz / 2.0
        )));
    }
    if shape.order == 0 {
        return Ok((0..n).map(|_| rng.next_symmetric(amplitude)).collect());
    }
    let beta = shape.beta(sample_rate_hz);
    let scale = 1.0 / shape.white_noise_gain(beta);
    let mut stages = vec![0.0; shape.order as usize];
    let mut step = |rng: &mut XorShift64Star| {
        let mut v = rng.next_symmetric(amplitude);
        for s in stages.iter_mut() {
            *s += beta * (v - *s);
            v = *s;
        }
        v * scale
    };
    let warmup = (10.0 * f64::from(shape.order) / beta).ceil() as usize;
    for _ in 0..warmup {
        step(rng);
    }
    Ok((0..n).map(|_| step(rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    Silence,
    Noise,
    NoisePlusLeak,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Silence => "silence",
            PhaseLabel::Noise => "noise",
            PhaseLabel::NoisePlusLeak => "noise_plus_leak",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "silence" => Ok(PhaseLabel::Silence),
            "noise" => Ok(PhaseLabel::Noise),
            "noise_plus_leak" | "leak" => Ok(PhaseLabel::NoisePlusLeak),
            other => Err(Error::invalid(format!("unknown phase label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenePhase {
    pub label: PhaseLabel,
    pub duration_s: f64,
    pub noise_amplitude: f64,
    pub leak_amplitude: f64,
    pub leak_freq_hz: f64,
}

impl ScenePhase {
    pub fn silence(duration_s: f64) -> Self {
        Self {
            label: PhaseLabel::Silence,
            duration_s,
            noise_amplitude: 0.0,
            leak_amplitude: 0.0,
            leak_freq_hz: DEFAULT_LEAK_FREQ_HZ,
        }
    }

    pub fn noise(duration_s: f64, noise_amplitude: f64) -> Self {
        Self { label: PhaseLabel::Noise, noise_amplitude, ..Self::silence(duration_s) }
    }

    pub fn noise_plus_leak(duration_s: f64, noise_amplitude: f64, leak_amplitude: f64, leak_freq_hz: f64) -> Self {
        Self { label: PhaseLabel::NoisePlusLeak, duration_s, noise_amplitude, leak_amplitude, leak_freq_hz }
    }

    fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        require_positive("phase duration_s", self.duration_s)?;
        require_amplitude("noise_amplitude", self.noise_amplitude)?;
        require_amplitude("leak_amplitude", self.leak_amplitude)?;
        require_positive("leak_freq_hz", self.leak_freq_hz)?;
        match self.label {
            PhaseLabel::Silence if self.noise_amplitude != 0.0 || self.leak_amplitude != 0.0 => {
                Err(Error::invalid("silence phase must have zero noise and leak amplitude"))
            }
            PhaseLabel::Noise if self.leak_amplitude != 0.0 => {
                Err(Error::invalid("noise phase must have zero leak amplitude"))
            }
            PhaseLabel::NoisePlusLeak if self.leak_freq_hz >= sample_rate_hz / 2.0 => {
                Err(Error::Aliasing { freq_hz: self.leak_freq_hz, sample_rate_hz })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub phases: Vec<ScenePhase>,
    pub sample_rate_hz: f64,
    pub seed: u64,
    pub noise_shape: NoiseShape,
    /// Amplitude of the unshaped uniform sensor noise added to every phase.
    pub floor_amplitude: f64,
}

impl Scene {
    pub fn new(phases: Vec<ScenePhase>, sample_rate_hz: f64, seed: u64) -> Self {
        Self {
            phases,
            sample_rate_hz,
            seed,
            noise_shape: NoiseShape::default(),
            floor_amplitude: DEFAULT_FLOOR_AMPLITUDE,
        }
    }

    /// Silence 2 s, compressor noise 3 s, noise plus a 26 kHz leak 3 s, at 62.5 kHz.
    pub fn leak_protocol(seed: u64) -> Self {
        Self::new(
            vec![
                ScenePhase::silence(2.0),
                ScenePhase::noise(3.0, DEFAULT_NOISE_AMPLITUDE),
                ScenePhase::noise_plus_leak(3.0, DEFAULT_NOISE_AMPLITUDE, DEFAULT_LEAK_AMPLITUDE, DEFAULT_LEAK_FREQ_HZ),
            ],
            62500.0,
            seed,
        )
    }

    pub fn duration_s(&self) -> f64 {
        self.phases.iter().map(|p| p.duration_s).sum()
    }
}

/// Ground truth for one phase of a composed scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub label: PhaseLabel,
    pub t_start_s: f64,
    pub t_end_s: f64,
}

/// Renders `scene` into one buffer plus per-phase annotations.
///
/// Phase `i` draws its noise from sub-stream `i + 1` of the scene seed and
/// the sensor floor from sub-stream 0, so the result is a pure function of
/// the scene.
pub fn compose_scene(scene: &Scene) -> Result<(SampleBuffer, Vec<Annotation>)> {
    let fs = scene.sample_rate_hz;
    require_positive("sample_rate_hz", fs)?;
    require_amplitude("floor_amplitude", scene.floor_amplitude)?;
    if scene.phases.is_empty() {
        return Err(Error::invalid("scene has no phases"));
    }
    for p in &scene.phases {
        p.validate(fs)?;
    }

    let mut samples = Vec::new();
    let mut annotations = Vec::with_capacity(scene.phases.len());
    for (i, phase) in scene.phases.iter().enumerate() {
        let n = sample_count(phase.duration_s, fs)?;
        let start = samples.len();
        if phase.noise_amplitude > 0.0 {
            let mut rng = XorShift64Star::derive(scene.seed, i as u64 + 1);
            samples.extend(shaped_noise(&mut rng, phase.noise_amplitude, scene.noise_shape, fs, n)?);
        } else {
            samples.resize(start + n, 0.0);
        }
        if phase.label == PhaseLabel::NoisePlusLeak && phase.leak_amplitude > 0.0 {
            let tone = synth_tone(phase.leak_freq_hz, phase.leak_amplitude, fs, phase.duration_s, 0.0)?;
            for (s, t) in samples[start..].iter_mut().zip(tone.samples()) {
                *s += t;
            }
        }
        annotations.push(Annotation {
            label: phase.label,
            t_start_s: start as f64 / fs,
            t_end_s: samples.len() as f64 / fs,
        });
    }
    if samples.is_empty() {
        return Err(Error::invalid("scene renders to zero samples"));
    }
    if scene.floor_amplitude > 0.0 {
        let mut rng = XorShift64Star::derive(scene.seed, 0);
        for s in samples.iter_mut() {
            *s += rng.next_symmetric(scene.floor_amplitude);
        }
    }
    Ok((SampleBuffer::new(samples, fs)?, annotations))
}
