//! Python bindings. Samples cross the boundary as lists of floats, RMS
//! reports as `(t_end_s, rms, n_samples)` tuples and events as
//! `(t_start_s, t_end_s, peak_rms, mean_rms)` tuples.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use ultraleak_core::detector::{self, DetectionEvent, DetectorConfig};
use ultraleak_core::dsp::{self, FilterState, IirSpec, RmsReport, SampleBuffer};
use ultraleak_core::stream::{self, DecodeEvent, Framing};
use ultraleak_core::synth::{self, Annotation, LeakSourceSpec, NoiseShape, PhaseLabel, Scene, ScenePhase};
use ultraleak_core::{defaults, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPyErr<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPyErr<T> for ultraleak_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

type Report = (f64, f64, usize);
type Event = (f64, f64, f64, f64);
type Span = (String, f64, f64);

fn buffer(samples: Vec<f64>, sample_rate_hz: f64) -> PyResult<SampleBuffer> {
    SampleBuffer::new(samples, sample_rate_hz).py_err()
}

fn reports_out(reports: Vec<RmsReport>) -> Vec<Report> {
    reports.into_iter().map(|r| (r.t_end_s, r.rms, r.n_samples)).collect()
}

fn reports_in(reports: Vec<Report>) -> Vec<RmsReport> {
    reports.into_iter().map(|(t_end_s, rms, n_samples)| RmsReport { t_end_s, rms, n_samples }).collect()
}

fn spans_out(annotations: &[Annotation]) -> Vec<Span> {
    annotations.iter().map(|a| (a.label.to_string(), a.t_start_s, a.t_end_s)).collect()
}

/// First-order high-pass coefficient for a cutoff and sample rate.
#[pyclass(name = "FilterDesign", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyFilterDesign(dsp::FilterDesign);

#[pymethods]
impl PyFilterDesign {
    #[new]
    #[pyo3(signature = (cutoff_hz = defaults::CUTOFF_HZ, sample_rate_hz = defaults::SAMPLE_RATE_HZ))]
    fn new(cutoff_hz: f64, sample_rate_hz: f64) -> PyResult<Self> {
        dsp::design_highpass(cutoff_hz, sample_rate_hz).py_err().map(Self)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn cutoff_hz(&self) -> f64 {
        self.0.cutoff_hz()
    }

    #[getter]
    fn sample_rate_hz(&self) -> f64 {
        self.0.sample_rate_hz()
    }

    #[getter]
    fn time_constant_s(&self) -> f64 {
        self.0.time_constant_s()
    }

    /// Steady-state magnitude response at `freq_hz`.
    fn gain_at(&self, freq_hz: f64) -> f64 {
        self.0.gain_at(freq_hz)
    }

    fn __repr__(&self) -> String {
        format!(
            "FilterDesign(cutoff_hz={}, sample_rate_hz={}, alpha={:.6})",
            self.0.cutoff_hz(),
            self.0.sample_rate_hz(),
            self.0.alpha()
        )
    }
}

/// Streaming high-pass filter; state carries across `process` calls.
#[pyclass(name = "Highpass")]
struct PyHighpass {
    design: dsp::FilterDesign,
    state: FilterState,
}

#[pymethods]
impl PyHighpass {
    #[new]
    #[pyo3(signature = (cutoff_hz = defaults::CUTOFF_HZ, sample_rate_hz = defaults::SAMPLE_RATE_HZ))]
    fn new(cutoff_hz: f64, sample_rate_hz: f64) -> PyResult<Self> {
        Ok(Self { design: dsp::design_highpass(cutoff_hz, sample_rate_hz).py_err()?, state: FilterState::new() })
    }

    fn process(&mut self, samples: Vec<f64>) -> PyResult<Vec<f64>> {
        let input = buffer(samples, self.design.sample_rate_hz())?;
        let (state, out) = dsp::highpass_buffer(&self.design, self.state, &input).py_err()?;
        self.state = state;
        Ok(out.into_samples())
    }

    fn reset(&mut self) {
        self.state = FilterState::new();
    }

    /// `(previous input, previous output)`.
    #[getter]
    fn state(&self) -> (f64, f64) {
        (self.state.prev_input, self.state.prev_output)
    }

    #[getter]
    fn design(&self) -> PyFilterDesign {
        PyFilterDesign(self.design)
    }
}

#[pyfunction]
#[pyo3(signature = (cutoff_hz = defaults::CUTOFF_HZ, sample_rate_hz = defaults::SAMPLE_RATE_HZ))]
fn design_highpass(cutoff_hz: f64, sample_rate_hz: f64) -> PyResult<PyFilterDesign> {
    PyFilterDesign::new(cutoff_hz, sample_rate_hz)
}

/// Whole-buffer high-pass from rest.
#[pyfunction]
#[pyo3(signature = (samples, cutoff_hz = defaults::CUTOFF_HZ, sample_rate_hz = defaults::SAMPLE_RATE_HZ))]
fn highpass(samples: Vec<f64>, cutoff_hz: f64, sample_rate_hz: f64) -> PyResult<Vec<f64>> {
    PyHighpass::new(cutoff_hz, sample_rate_hz)?.process(samples)
}

/// Direct-form IIR: `feedback` holds a1.., `feedforward` holds b0...
#[pyfunction]
#[pyo3(signature = (feedback, feedforward, samples, sample_rate_hz = defaults::SAMPLE_RATE_HZ))]
fn iir_apply(feedback: Vec<f64>, feedforward: Vec<f64>, samples: Vec<f64>, sample_rate_hz: f64) -> PyResult<Vec<f64>> {
    let input = buffer(samples, sample_rate_hz)?;
    dsp::iir_apply(&IirSpec::new(feedback, feedforward), &input).py_err().map(SampleBuffer::into_samples)
}

#[pyfunction]
fn rms(values: Vec<f64>) -> PyResult<f64> {
    dsp::rms(&values).py_err()
}

/// Windowed RMS; pass `cutoff_hz=None` to measure the raw signal.
#[pyfunction]
#[pyo3(signature = (samples, sample_rate_hz = defaults::SAMPLE_RATE_HZ, cutoff_hz = Some(defaults::CUTOFF_HZ), window_ms = defaults::WINDOW_MS))]
fn windowed_rms(
    samples: Vec<f64>,
    sample_rate_hz: f64,
    cutoff_hz: Option<f64>,
    window_ms: f64,
) -> PyResult<Vec<Report>> {
    let input = buffer(samples, sample_rate_hz)?;
    let reports = match cutoff_hz {
        Some(fc) => dsp::windowed_rms(&dsp::design_highpass(fc, sample_rate_hz).py_err()?, &input, window_ms),
        None => dsp::windowed_rms_unfiltered(&input, window_ms),
    };
    reports.py_err().map(reports_out)
}

/// One-sided magnitude spectrum of the first `n` samples as `(freq_hz, magnitude)` pairs.
#[pyfunction]
#[pyo3(signature = (samples, sample_rate_hz = defaults::SAMPLE_RATE_HZ, n = None))]
fn spectrum(samples: Vec<f64>, sample_rate_hz: f64, n: Option<usize>) -> PyResult<Vec<(f64, f64)>> {
    let n = n.unwrap_or(samples.len());
    let input = buffer(samples, sample_rate_hz)?;
    let bins = dsp::spectrum(&input, n).py_err()?;
    Ok(bins.into_iter().map(|b| (b.freq_hz, b.magnitude)).collect())
}

#[pyfunction]
fn strouhal_frequency(k_coeff: f64, velocity_mps: f64, hole_diameter_m: f64) -> PyResult<f64> {
    synth::strouhal_frequency(&LeakSourceSpec { k_coeff, velocity_mps, hole_diameter_m }).py_err()
}

#[pyfunction]
#[pyo3(signature = (freq_hz, amplitude, sample_rate_hz = defaults::SAMPLE_RATE_HZ, duration_s = 1.0, phase_rad = 0.0))]
fn synth_tone(
    freq_hz: f64,
    amplitude: f64,
    sample_rate_hz: f64,
    duration_s: f64,
    phase_rad: f64,
) -> PyResult<Vec<f64>> {
    synth::synth_tone(freq_hz, amplitude, sample_rate_hz, duration_s, phase_rad)
        .py_err()
        .map(SampleBuffer::into_samples)
}

#[pyfunction]
#[pyo3(signature = (amplitude, seed, sample_rate_hz = defaults::SAMPLE_RATE_HZ, duration_s = 1.0, cutoff_hz = NoiseShape::default().cutoff_hz, order = NoiseShape::default().order))]
fn synth_noise(
    amplitude: f64,
    seed: u64,
    sample_rate_hz: f64,
    duration_s: f64,
    cutoff_hz: f64,
    order: u32,
) -> PyResult<Vec<f64>> {
    synth::synth_noise(amplitude, NoiseShape { cutoff_hz, order }, sample_rate_hz, duration_s, seed)
        .py_err()
        .map(SampleBuffer::into_samples)
}

fn render(scene: &Scene) -> PyResult<(Vec<f64>, Vec<Span>)> {
    let (buf, annotations) = synth::compose_scene(scene).py_err()?;
    Ok((buf.into_samples(), spans_out(&annotations)))
}

/// Renders `[(label, seconds), ...]` with labels silence, noise or leak.
/// Returns `(samples, [(label, t_start_s, t_end_s), ...])`.
#[pyfunction]
#[pyo3(signature = (
    phases,
    seed,
    sample_rate_hz = defaults::SAMPLE_RATE_HZ,
    noise_amplitude = synth::DEFAULT_NOISE_AMPLITUDE,
    leak_amplitude = synth::DEFAULT_LEAK_AMPLITUDE,
    leak_freq_hz = synth::DEFAULT_LEAK_FREQ_HZ,
    floor_amplitude = synth::DEFAULT_FLOOR_AMPLITUDE,
))]
fn compose_scene(
    phases: Vec<(String, f64)>,
    seed: u64,
    sample_rate_hz: f64,
    noise_amplitude: f64,
    leak_amplitude: f64,
    leak_freq_hz: f64,
    floor_amplitude: f64,
) -> PyResult<(Vec<f64>, Vec<Span>)> {
    let phases = phases
        .into_iter()
        .map(|(label, d)| {
            Ok(match label.parse::<PhaseLabel>().py_err()? {
                PhaseLabel::Silence => ScenePhase::silence(d),
                PhaseLabel::Noise => ScenePhase::noise(d, noise_amplitude),
                PhaseLabel::NoisePlusLeak => {
                    ScenePhase::noise_plus_leak(d, noise_amplitude, leak_amplitude, leak_freq_hz)
                }
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let mut scene = Scene::new(phases, sample_rate_hz, seed);
    scene.floor_amplitude = floor_amplitude;
    render(&scene)
}

/// The default three-phase scene: silence, noise, noise plus leak.
#[pyfunction]
fn leak_protocol(seed: u64) -> PyResult<(Vec<f64>, Vec<Span>)> {
    render(&Scene::leak_protocol(seed))
}

#[pyfunction]
#[pyo3(signature = (samples, sample_rate_hz = defaults::SAMPLE_RATE_HZ))]
fn wav_encode<'py>(py: Python<'py>, samples: Vec<f64>, sample_rate_hz: f64) -> PyResult<Bound<'py, PyBytes>> {
    let mut out = Vec::new();
    stream::wav_write(&buffer(samples, sample_rate_hz)?, &mut out).py_err()?;
    Ok(PyBytes::new(py, &out))
}

/// Returns `(samples, sample_rate_hz)`.
#[pyfunction]
fn wav_decode(data: &[u8]) -> PyResult<(Vec<f64>, f64)> {
    let buf = stream::parse_wav(data).py_err()?;
    let fs = buf.sample_rate_hz();
    Ok((buf.into_samples(), fs))
}

#[pyfunction]
fn frame_encode<'py>(py: Python<'py>, seq: u32, samples: Vec<i16>) -> PyResult<Bound<'py, PyBytes>> {
    let bytes = stream::frame_encode(seq, &samples).py_err()?;
    Ok(PyBytes::new(py, &bytes))
}

/// Decodes exactly one frame; returns `(seq, samples)`.
#[pyfunction]
fn frame_decode(data: &[u8]) -> PyResult<(u32, Vec<i16>)> {
    let f = stream::frame_decode(data).py_err()?;
    Ok((f.seq, f.samples))
}

/// Scans a byte stream for frames. Each event is a dict with a `kind` of
/// `frame`, `gap` or `discarded`.
#[pyfunction]
fn frame_decode_stream<'py>(py: Python<'py>, data: &[u8]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let events = stream::frame_decode_stream(data).py_err()?;
    events
        .into_iter()
        .map(|e| {
            let d = PyDict::new(py);
            match e {
                DecodeEvent::Frame(f) => {
                    d.set_item("kind", "frame")?;
                    d.set_item("seq", f.seq)?;
                    d.set_item("samples", f.samples)?;
                }
                DecodeEvent::Gap { expected, found } => {
                    d.set_item("kind", "gap")?;
                    d.set_item("expected", expected)?;
                    d.set_item("found", found)?;
                }
                DecodeEvent::Discarded { offset, reason } => {
                    d.set_item("kind", "discarded")?;
                    d.set_item("offset", offset)?;
                    d.set_item("reason", format!("{reason:?}"))?;
                }
            }
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn crc16_ccitt_false(data: &[u8]) -> u16 {
    stream::crc16_ccitt_false(data)
}

#[pyfunction]
#[pyo3(signature = (sample_rate_hz = defaults::SAMPLE_RATE_HZ, bits_per_sample = 16, baud = defaults::BAUD, framing = "8N1"))]
fn link_budget<'py>(
    py: Python<'py>,
    sample_rate_hz: f64,
    bits_per_sample: u32,
    baud: f64,
    framing: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let framing: Framing = framing.parse().py_err()?;
    let b = stream::link_budget(sample_rate_hz, bits_per_sample, baud, framing).py_err()?;
    let d = PyDict::new(py);
    d.set_item("capture_rate_bps", b.capture_rate_bps)?;
    d.set_item("link_rate_bps", b.link_rate_bps)?;
    d.set_item("duty_cycle", b.duty_cycle)?;
    d.set_item("lossless_continuous", b.lossless_continuous)?;
    Ok(d)
}

/// Returns `(median, median absolute deviation)` of the first `n` reports.
#[pyfunction]
#[pyo3(signature = (reports, n = DetectorConfig::default().baseline_windows))]
fn estimate_baseline(reports: Vec<Report>, n: usize) -> PyResult<(f64, f64)> {
    detector::estimate_baseline(&reports_in(reports), n).py_err()
}

#[pyfunction]
#[pyo3(signature = (
    reports,
    baseline_windows = DetectorConfig::default().baseline_windows,
    trigger_factor = DetectorConfig::default().trigger_factor,
    release_factor = DetectorConfig::default().release_factor,
    min_trigger_windows = DetectorConfig::default().min_trigger_windows,
))]
fn detect(
    reports: Vec<Report>,
    baseline_windows: usize,
    trigger_factor: f64,
    release_factor: f64,
    min_trigger_windows: usize,
) -> PyResult<Vec<Event>> {
    let config = DetectorConfig { baseline_windows, trigger_factor, release_factor, min_trigger_windows };
    let events = detector::detect(&reports_in(reports), &config).py_err()?;
    Ok(events.into_iter().map(|e| (e.t_start_s, e.t_end_s, e.peak_rms, e.mean_rms)).collect())
}

/// Matches events against `[(label, t_start_s, t_end_s), ...]` ground truth.
#[pyfunction]
fn score<'py>(py: Python<'py>, events: Vec<Event>, truth: Vec<Span>) -> PyResult<Bound<'py, PyDict>> {
    let events: Vec<DetectionEvent> = events
        .into_iter()
        .map(|(t_start_s, t_end_s, peak_rms, mean_rms)| DetectionEvent { t_start_s, t_end_s, peak_rms, mean_rms })
        .collect();
    let truth = truth
        .into_iter()
        .map(|(label, t_start_s, t_end_s)| Ok(Annotation { label: label.parse().py_err()?, t_start_s, t_end_s }))
        .collect::<PyResult<Vec<_>>>()?;
    let s = detector::score(&events, &truth);
    let d = PyDict::new(py);
    d.set_item("true_positives", s.true_positives)?;
    d.set_item("false_positives", s.false_positives)?;
    d.set_item("false_negatives", s.false_negatives)?;
    d.set_item("max_latency_s", s.max_latency_s())?;
    d.set_item("detection_latency_s", s.detection_latency_s)?;
    Ok(d)
}

#[pymodule]
fn ultraleak(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFilterDesign>()?;
    m.add_class::<PyHighpass>()?;
    m.add_function(wrap_pyfunction!(design_highpass, m)?)?;
    m.add_function(wrap_pyfunction!(highpass, m)?)?;
    m.add_function(wrap_pyfunction!(iir_apply, m)?)?;
    m.add_function(wrap_pyfunction!(rms, m)?)?;
    m.add_function(wrap_pyfunction!(windowed_rms, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(strouhal_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(synth_tone, m)?)?;
    m.add_function(wrap_pyfunction!(synth_noise, m)?)?;
    m.add_function(wrap_pyfunction!(compose_scene, m)?)?;
    m.add_function(wrap_pyfunction!(leak_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(wav_encode, m)?)?;
    m.add_function(wrap_pyfunction!(wav_decode, m)?)?;
    m.add_function(wrap_pyfunction!(frame_encode, m)?)?;
    m.add_function(wrap_pyfunction!(frame_decode, m)?)?;
    m.add_function(wrap_pyfunction!(frame_decode_stream, m)?)?;
    m.add_function(wrap_pyfunction!(crc16_ccitt_false, m)?)?;
    m.add_function(wrap_pyfunction!(link_budget, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add("SAMPLE_RATE_HZ", defaults::SAMPLE_RATE_HZ)?;
    m.add("CUTOFF_HZ", defaults::CUTOFF_HZ)?;
    m.add("WINDOW_MS", defaults::WINDOW_MS)?;
    Ok(())
}
