//! Checks against oracles that do not share code with the kernels: the
//! analytic transfer function evaluated with complex arithmetic, a bitwise
//! CRC, Parseval's identity and closed-form signal statistics.

use std::f64::consts::PI;

use num_complex::Complex64;
use ultraleak::dsp::{
    design_highpass, dft_magnitudes, highpass_buffer, peak_bin, rms, spectrum, windowed_rms, FilterState, SampleBuffer,
};
use ultraleak::stream::crc16_ccitt_false;
use ultraleak::synth::{
    compose_scene, strouhal_frequency, synth_noise, synth_tone, LeakSourceSpec, NoiseShape, PhaseLabel, Scene,
    ScenePhase,
};

const FS: f64 = 62500.0;

/// |H(e^{jω})| for H(z) = α(1 − z⁻¹)/(1 − αz⁻¹).
fn analytic_gain(alpha: f64, freq_hz: f64, fs: f64) -> f64 {
    let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / fs);
    let h = alpha * (1.0 - z_inv) / (1.0 - alpha * z_inv);
    h.norm()
}

fn bitwise_crc(data: &[u8]) -> u16 {
    let mut crc: u16 = 0xFFFF;
    for &byte in data {
        crc ^= u16::from(byte) << 8;
        for _ in 0..8 {
            crc = if crc & 0x8000 != 0 { (crc << 1) ^ 0x1021 } else { crc << 1 };
        }
    }
    crc
}

#[test]
fn closed_form_gain_agrees_with_complex_evaluation() {
    let d = design_highpass(20000.0, FS).unwrap();
    for f in [0.0, 100.0, 1000.0, 9947.0, 20000.0, 26000.0, 31249.0] {
        let a = analytic_gain(d.alpha(), f, FS);
        assert!((d.gain_at(f) - a).abs() < 1e-12, "{f}: {} vs {a}", d.gain_at(f));
    }
}

#[test]
fn steady_state_amplitude_at_26khz() {
    let d = design_highpass(20000.0, FS).unwrap();
    let tone = synth_tone(26000.0, 1.0, FS, 1.0, 0.0).unwrap();
    let (_, out) = highpass_buffer(&d, FilterState::new(), &tone).unwrap();
    // skip the first 100 samples of transient (α^100 ≈ 1e-48)
    let measured = rms(&out.samples()[100..]).unwrap() * 2f64.sqrt();
    let expected = analytic_gain(d.alpha(), 26000.0, FS);
    assert!((measured / expected - 1.0).abs() < 1e-3, "{measured} vs {expected}");
}

#[test]
fn spectrum_ratio_matches_transfer_function() {
    let d = design_highpass(20000.0, FS).unwrap();
    let tone = synth_tone(26000.0, 1000.0, FS, 1.0, 0.3).unwrap();
    let (_, filtered) = highpass_buffer(&d, FilterState::new(), &tone).unwrap();
    let raw = spectrum(&tone, tone.len()).unwrap();
    let filt = spectrum(&filtered, filtered.len()).unwrap();
    let (p_raw, p_filt) = (peak_bin(&raw).unwrap(), peak_bin(&filt).unwrap());
    assert_eq!(p_raw.freq_hz, 26000.0);
    assert_eq!(p_filt.freq_hz, 26000.0);
    let expected = analytic_gain(d.alpha(), 26000.0, FS);
    let ratio = p_filt.magnitude / p_raw.magnitude;
    assert!((ratio / expected - 1.0).abs() < 0.01, "{ratio} vs {expected}");
}

#[test]
fn parseval_and_exact_bin() {
    let noise = synth_noise(1000.0, NoiseShape { cutoff_hz: 5000.0, order: 1 }, FS, 0.1, 3).unwrap();
    let n = noise.len();
    let mags = dft_magnitudes(&noise, n).unwrap();
    let freq_energy: f64 = mags.iter().map(|m| m * m).sum();
    let time_energy: f64 = noise.samples().iter().map(|x| x * x).sum::<f64>() * n as f64;
    assert!((freq_energy / time_energy - 1.0).abs() < 1e-6);

    let zeros = SampleBuffer::zeros(128, FS).unwrap();
    assert!(dft_magnitudes(&zeros, 128).unwrap().iter().all(|&m| m == 0.0));
}

#[test]
fn crc_matches_bitwise_reference() {
    let mut data = Vec::new();
    for len in 0..300usize {
        data.push((len * 131 % 251) as u8);
        assert_eq!(crc16_ccitt_false(&data), bitwise_crc(&data), "len {len}");
    }
    // frame (seq 0, [0]) body
    let body = [0x01, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0];
    assert_eq!(crc16_ccitt_false(&body), bitwise_crc(&body));
}

#[test]
fn shaped_noise_has_little_ultrasonic_energy() {
    let noise = synth_noise(2000.0, NoiseShape { cutoff_hz: 5000.0, order: 2 }, FS, 1.0, 21).unwrap();
    let bins = spectrum(&noise, noise.len()).unwrap();
    let total: f64 = bins.iter().map(|b| b.magnitude * b.magnitude).sum();
    let above: f64 = bins.iter().filter(|b| b.freq_hz > 20000.0).map(|b| b.magnitude * b.magnitude).sum();
    assert!(above / total < 0.05, "{}", above / total);
}

#[test]
fn default_noise_shape_survives_highpass_weakly() {
    let d = design_highpass(20000.0, FS).unwrap();
    let noise = synth_noise(2000.0, NoiseShape::default(), FS, 3.0, 4).unwrap();
    let (_, filtered) = highpass_buffer(&d, FilterState::new(), &noise).unwrap();
    let raw = rms(noise.samples()).unwrap();
    let after = rms(filtered.samples()).unwrap();
    assert!(raw > 1000.0, "{raw}");
    assert!(after < 20.0, "{after}");
}

#[test]
fn tone_and_noise_powers_add() {
    let noise = synth_noise(2000.0, NoiseShape::default(), FS, 1.0, 8).unwrap();
    let tone = synth_tone(26000.0, 400.0, FS, 1.0, 0.0).unwrap();
    let sum: Vec<f64> = noise.samples().iter().zip(tone.samples()).map(|(a, b)| a + b).collect();
    let lhs = rms(&sum).unwrap().powi(2);
    let rhs = rms(noise.samples()).unwrap().powi(2) + rms(tone.samples()).unwrap().powi(2);
    assert!((lhs / rhs - 1.0).abs() < 0.05);
}

#[test]
fn strouhal_forty_khz_example() {
    let f = strouhal_frequency(&LeakSourceSpec { k_coeff: 0.2, velocity_mps: 200.0, hole_diameter_m: 0.001 }).unwrap();
    assert!((f - 40000.0).abs() < 1e-6);
}

fn phase_means(reports: &[ultraleak::dsp::RmsReport], from: f64, to: f64) -> Vec<f64> {
    reports.iter().filter(|r| r.t_end_s > from + 1e-9 && r.t_end_s <= to + 1e-9).map(|r| r.rms).collect()
}

#[test]
fn leak_free_final_phase_matches_noise_phase() {
    let d = design_highpass(20000.0, FS).unwrap();
    let mut diffs = Vec::new();
    let mut noise_windows = Vec::new();
    for seed in 0..30 {
        let scene = Scene::new(
            vec![
                ScenePhase::silence(2.0),
                ScenePhase::noise(3.0, 2000.0),
                ScenePhase::noise_plus_leak(3.0, 2000.0, 0.0, 26000.0),
            ],
            FS,
            seed,
        );
        let (buf, ann) = compose_scene(&scene).unwrap();
        assert_eq!(ann[2].label, PhaseLabel::NoisePlusLeak);
        let reports = windowed_rms(&d, &buf, 200.0).unwrap();
        let noise = phase_means(&reports, 2.0, 5.0);
        let last = phase_means(&reports, 5.0, 8.0);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        diffs.push(mean(&last) - mean(&noise));
        noise_windows.extend(noise);
    }
    let mu = noise_windows.iter().sum::<f64>() / noise_windows.len() as f64;
    let sigma = (noise_windows.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / noise_windows.len() as f64).sqrt();
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    assert!(mean_diff.abs() < 3.0 * sigma, "{mean_diff} vs σ {sigma}");
}

#[test]
fn leak_phase_stands_out_after_filtering() {
    let d = design_highpass(20000.0, FS).unwrap();
    let (buf, _) = compose_scene(&Scene::leak_protocol(42)).unwrap();
    let reports = windowed_rms(&d, &buf, 200.0).unwrap();
    assert_eq!(reports.len(), 40);
    let noise = phase_means(&reports, 2.0, 5.0);
    let leak = phase_means(&reports, 5.0, 8.0);
    let max_noise = noise.iter().cloned().fold(0.0, f64::max);
    let min_leak = leak.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min_leak > 5.0 * max_noise, "{min_leak} vs {max_noise}");
}
