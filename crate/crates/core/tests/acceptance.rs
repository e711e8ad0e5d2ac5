//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! cargo test -p ultraleak --test acceptance

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use ultraleak::detector::{detect, score, DetectorConfig};
use ultraleak::dsp::{
    design_highpass, dft_magnitudes, highpass_buffer, iir_apply, peak_bin, rms, spectrum, windowed_rms,
    windowed_rms_unfiltered, FilterState, IirSpec, RmsReport, SampleBuffer,
};
use ultraleak::stream::{
    frame_decode, frame_decode_stream, frame_encode, link_budget, parse_wav, wav_write, DecodeEvent, Framing,
};
use ultraleak::synth::{compose_scene, synth_tone, Annotation, PhaseLabel, Scene, ScenePhase, XorShift64Star};

const FS: f64 = 62500.0;
const CUTOFF: f64 = 20000.0;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// |H(e^{jω})| for H(z) = α(1 − z⁻¹)/(1 − αz⁻¹), evaluated directly.
fn analytic_gain(alpha: f64, freq_hz: f64) -> f64 {
    let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / FS);
    (alpha * (1.0 - z_inv) / (1.0 - alpha * z_inv)).norm()
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

fn ulp(v: f64) -> f64 {
    let a = v.abs();
    f64::from_bits(a.to_bits() + 1) - a
}

fn random_pcm(rng: &mut XorShift64Star, len: usize) -> Vec<f64> {
    (0..len).map(|_| f64::from((rng.next_u64() >> 48) as u16 as i16)).collect()
}

fn c1_coefficient() -> Outcome {
    let alpha = design_highpass(CUTOFF, FS).map_err(|e| e.to_string())?.alpha();
    ensure((0.325..=0.335).contains(&alpha), || format!("alpha = {alpha}"))?;
    Ok(format!("alpha = {alpha:.6}"))
}

fn c2_filter_vs_oracle() -> Outcome {
    let d = design_highpass(CUTOFF, FS).unwrap();
    let mut ratios = Vec::new();
    let mut worst: f64 = 0.0;
    for f in [1000.0, 5000.0, 10000.0, 20000.0, 26000.0] {
        let tone = synth_tone(f, 10000.0, FS, 1.0, 0.0).unwrap();
        let (_, out) = highpass_buffer(&d, FilterState::new(), &tone).unwrap();
        let ratio = rms(out.samples()).unwrap() / rms(tone.samples()).unwrap();
        let expected = analytic_gain(d.alpha(), f);
        let err = (ratio / expected - 1.0).abs();
        worst = worst.max(err);
        ensure(err < 0.01, || format!("{f} Hz: measured {ratio:.6}, |H| {expected:.6}"))?;
        ratios.push(ratio);
    }
    ensure(ratios.windows(2).all(|w| w[0] < w[1]), || format!("not increasing: {ratios:?}"))?;
    Ok(format!("max relative error {worst:.2e}; ratios {ratios:.4?}"))
}

fn c3_selectivity() -> Outcome {
    let a = design_highpass(CUTOFF, FS).unwrap().alpha();
    let sel = analytic_gain(a, 26000.0) / analytic_gain(a, 1000.0);
    ensure(sel >= 8.0, || format!("|H(26k)|/|H(1k)| = {sel}"))?;
    Ok(format!("|H(26k)|/|H(1k)| = {sel:.3}"))
}

fn c4_streaming() -> Outcome {
    let d = design_highpass(CUTOFF, FS).unwrap();
    let mut rng = XorShift64Star::new(0xC4);
    for case in 0..100 {
        let len = 1 + (rng.next_u64() % 20_000) as usize;
        let buf = SampleBuffer::new(random_pcm(&mut rng, len), FS).unwrap();
        let (end_whole, whole) = highpass_buffer(&d, FilterState::new(), &buf).unwrap();
        let max_chunk = match case % 4 {
            0 => 1,
            1 => 7,
            2 => 62500,
            _ => 1 + (rng.next_u64() % 3000) as usize,
        };
        let mut state = FilterState::new();
        let mut out = Vec::with_capacity(len);
        let mut pos = 0;
        while pos < len {
            let size = if case % 4 == 3 { 1 + (rng.next_u64() as usize % max_chunk) } else { max_chunk };
            let end = (pos + size).min(len);
            let (s, part) = highpass_buffer(&d, state, &buf.slice(pos..end)).unwrap();
            state = s;
            out.extend_from_slice(part.samples());
            pos = end;
        }
        let identical = out.iter().zip(whole.samples()).all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(identical && out.len() == len && state == end_whole, || format!("buffer {case} differs"))?;
    }
    Ok("100 buffers bit-identical (chunk sizes 1, 7, 62500, random)".into())
}

fn c5_iir_subsumption() -> Outcome {
    let d = design_highpass(CUTOFF, FS).unwrap();
    let mut rng = XorShift64Star::new(0xC5);
    let xs = random_pcm(&mut rng, 1_000_000);
    let buf = SampleBuffer::new(xs, FS).unwrap();
    let (_, direct) = highpass_buffer(&d, FilterState::new(), &buf).unwrap();
    let general = iir_apply(&IirSpec::new(vec![-d.alpha()], vec![d.alpha(), -d.alpha()]), &buf).unwrap();
    let full_scale = buf.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let unit = ulp(full_scale);
    let worst =
        direct.samples().iter().zip(general.samples()).map(|(a, b)| (a - b).abs() / unit).fold(0.0f64, f64::max);
    ensure(worst <= 4.0, || format!("max deviation {worst} ULP"))?;
    Ok(format!("max deviation {worst} ULP (ULP of full scale {full_scale})"))
}

fn c6_rms_identities() -> Outcome {
    for c in [0.0, 1.0, -3.3, 10.0, 1e-7, 32767.0, -32768.0, 0.1] {
        let r = rms(&vec![c; 12345]).unwrap();
        ensure(r == c.abs(), || format!("rms(const {c}) = {r}"))?;
    }
    let mut worst: f64 = 0.0;
    for (f, a) in [(1000.0, 1.0), (26000.0, 400.0), (125.0, 32767.0)] {
        // 1 s: f integral cycles, at least 100
        let tone = synth_tone(f, a, FS, 1.0, 0.0).unwrap();
        let err = (rms(tone.samples()).unwrap() / (a / 2f64.sqrt()) - 1.0).abs();
        worst = worst.max(err);
        ensure(err < 0.005, || format!("sine {f} Hz: relative error {err}"))?;
    }
    Ok(format!("constants exact; sine max relative error {worst:.2e}"))
}

fn leak_free_scene(seed: u64) -> Scene {
    let mut scene = Scene::leak_protocol(seed);
    scene.phases[2] = ScenePhase::noise(3.0, scene.phases[2].noise_amplitude);
    scene
}

fn in_phase<'a>(reports: &'a [RmsReport], ann: &Annotation) -> impl Iterator<Item = f64> + 'a {
    let (a, b) = (ann.t_start_s, ann.t_end_s);
    reports.iter().filter(move |r| r.t_end_s > a + 1e-9 && r.t_end_s <= b + 1e-9).map(|r| r.rms)
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

struct SceneStats {
    raw_noise: Vec<f64>,
    raw_leak: Vec<f64>,
    filt_ratio_min: f64,
    max_latency: f64,
    per_scene_raw_diff_max: f64,
}

fn c7_c8_scenes() -> (Outcome, Outcome) {
    let start = Instant::now();
    let d = design_highpass(CUTOFF, FS).unwrap();
    let cfg = DetectorConfig::default();
    let mut stats = SceneStats {
        raw_noise: Vec::new(),
        raw_leak: Vec::new(),
        filt_ratio_min: f64::INFINITY,
        max_latency: f64::NEG_INFINITY,
        per_scene_raw_diff_max: 0.0,
    };
    let mut failure = None;
    for seed in 0..100u64 {
        let (buf, truth) = compose_scene(&Scene::leak_protocol(seed)).unwrap();
        let reports = windowed_rms(&d, &buf, 200.0).unwrap();
        let events = detect(&reports, &cfg).unwrap();
        let s = score(&events, &truth);
        if events.len() != 1 || s.true_positives != 1 || s.false_negatives != 0 {
            failure.get_or_insert(format!("seed {seed}: {} events, score {s:?}", events.len()));
        }
        if let Some(l) = s.max_latency_s() {
            stats.max_latency = stats.max_latency.max(l);
        }

        let raw = windowed_rms_unfiltered(&buf, 200.0).unwrap();
        let (noise_ann, leak_ann) = (&truth[1], &truth[2]);
        debug_assert_eq!(leak_ann.label, PhaseLabel::NoisePlusLeak);
        let rn = mean(in_phase(&raw, noise_ann));
        let rl = mean(in_phase(&raw, leak_ann));
        stats.raw_noise.extend(in_phase(&raw, noise_ann));
        stats.raw_leak.extend(in_phase(&raw, leak_ann));
        stats.per_scene_raw_diff_max = stats.per_scene_raw_diff_max.max((rl / rn - 1.0).abs());
        let ratio = mean(in_phase(&reports, leak_ann)) / mean(in_phase(&reports, noise_ann));
        stats.filt_ratio_min = stats.filt_ratio_min.min(ratio);

        let (clean, _) = compose_scene(&leak_free_scene(seed)).unwrap();
        let clean_events = detect(&windowed_rms(&d, &clean, 200.0).unwrap(), &cfg).unwrap();
        if !clean_events.is_empty() {
            failure.get_or_insert(format!("leak-free seed {seed}: {} events", clean_events.len()));
        }
    }
    let elapsed = start.elapsed();

    let c7 = (|| {
        if let Some(f) = failure {
            return Err(f);
        }
        ensure(stats.max_latency <= 0.6, || format!("latency {} s", stats.max_latency))?;
        ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
        Ok(format!(
            "100/100 leak scenes one matching event, 0 events in 100 leak-free scenes, max latency {:.3} s, {:.1} s",
            stats.max_latency,
            elapsed.as_secs_f64()
        ))
    })();

    let c8 = (|| {
        let pooled = mean(stats.raw_leak.iter().copied()) / mean(stats.raw_noise.iter().copied()) - 1.0;
        ensure(pooled.abs() < 0.05, || format!("pooled raw difference {:.2}%", 100.0 * pooled))?;
        ensure(stats.filt_ratio_min >= 5.0, || format!("filtered ratio {:.2}", stats.filt_ratio_min))?;
        Ok(format!(
            "raw leak/noise differ {:.2}% pooled (worst single scene {:.2}%); filtered ratio ≥ {:.2} in every scene",
            100.0 * pooled,
            100.0 * stats.per_scene_raw_diff_max,
            stats.filt_ratio_min
        ))
    })();
    (c7, c8)
}

fn c9_link_budget() -> Outcome {
    let fast = link_budget(62500.0, 16, 921600.0, Framing::EIGHT_N_ONE).unwrap();
    ensure((fast.duty_cycle - 0.73728).abs() <= 1e-5, || format!("duty {}", fast.duty_cycle))?;
    ensure(!fast.lossless_continuous, || "62.5 kHz reported lossless".into())?;
    let slow = link_budget(16000.0, 16, 921600.0, Framing::EIGHT_N_ONE).unwrap();
    ensure(slow.lossless_continuous, || "16 kHz reported lossy".into())?;
    Ok(format!(
        "duty {:.5} (lossless={}), 16 kHz duty {:.2} (lossless={})",
        fast.duty_cycle, fast.lossless_continuous, slow.duty_cycle, slow.lossless_continuous
    ))
}

fn c10_io() -> Outcome {
    let mut rng = XorShift64Star::new(0xC10);
    for i in 0..1000 {
        let len = (rng.next_u64() % 4000) as usize;
        let rate = [8000.0, 16000.0, 44100.0, 62500.0][i % 4];
        let buf = SampleBuffer::new(random_pcm(&mut rng, len), rate).unwrap();
        let mut bytes = Vec::new();
        wav_write(&buf, &mut bytes).unwrap();
        let back = parse_wav(&bytes).map_err(|e| e.to_string())?;
        ensure(back == buf, || format!("WAV round trip {i} differs"))?;
    }

    let mut golden = Vec::new();
    golden.extend_from_slice(b"RIFF");
    golden.extend_from_slice(&[36, 0, 0, 0]);
    golden.extend_from_slice(b"WAVEfmt ");
    golden.extend_from_slice(&[16, 0, 0, 0, 1, 0, 1, 0]);
    golden.extend_from_slice(&[0x24, 0xF4, 0x00, 0x00]); // 62500
    golden.extend_from_slice(&[0x48, 0xE8, 0x01, 0x00]); // 125000
    golden.extend_from_slice(&[2, 0, 16, 0]);
    golden.extend_from_slice(b"data");
    golden.extend_from_slice(&[0, 0, 0, 0]);
    let mut empty = Vec::new();
    wav_write(&SampleBuffer::empty(FS).unwrap(), &mut empty).unwrap();
    ensure(empty == golden, || format!("header {empty:02X?}"))?;

    let mut intact = Vec::new();
    let mut stream = Vec::new();
    for (i, seq) in (0..1000u32).enumerate() {
        let len = 1 + (rng.next_u64() % 64) as usize;
        let samples: Vec<i16> = (0..len).map(|_| (rng.next_u64() >> 48) as u16 as i16).collect();
        let frame = frame_encode(seq, &samples).unwrap();
        let decoded = frame_decode(&frame).map_err(|e| e.to_string())?;
        ensure(decoded.seq == seq && decoded.samples == samples, || format!("frame round trip {i}"))?;
        match i % 10 {
            // corrupt one byte of the frame body
            3 => {
                let mut bad = frame.clone();
                let at = 2 + (rng.next_u64() as usize % (bad.len() - 2));
                bad[at] ^= 1 << (rng.next_u64() % 8);
                stream.extend(bad);
            }
            // garbage burst
            7 => {
                stream.extend((0..(rng.next_u64() % 300)).map(|_| rng.next_u64() as u8));
                stream.extend(&frame);
                intact.push(seq);
            }
            _ => {
                stream.extend(&frame);
                intact.push(seq);
            }
        }
    }
    let events = frame_decode_stream(stream.as_slice()).unwrap();
    let got: Vec<u32> = events
        .iter()
        .filter_map(|e| match e {
            DecodeEvent::Frame(f) => Some(f.seq),
            _ => None,
        })
        .collect();
    ensure(got == intact, || format!("recovered {} of {} intact frames", got.len(), intact.len()))?;

    let fuzz: Vec<u8> = (0..1_000_000).map(|_| rng.next_u64() as u8).collect();
    let fuzz_events = frame_decode_stream(fuzz.as_slice()).unwrap();
    let mut bad_crc = 0;
    for e in events.iter().chain(&fuzz_events) {
        if let DecodeEvent::Frame(f) = e {
            let mut body = vec![0x01];
            body.extend_from_slice(&f.seq.to_le_bytes());
            body.extend_from_slice(&(f.samples.len() as u32).to_le_bytes());
            for s in &f.samples {
                body.extend_from_slice(&s.to_le_bytes());
            }
            if bitwise_crc(&body) != f.checksum {
                bad_crc += 1;
            }
        }
    }
    ensure(bad_crc == 0, || format!("{bad_crc} frames with invalid CRC emitted"))?;
    Ok(format!(
        "1000 WAV + 1000 frame round trips, golden header, {}/{} intact frames recovered through corruption, 1e6 fuzz bytes ok",
        got.len(),
        intact.len()
    ))
}

fn c11_spectrum() -> Outcome {
    let mut rng = XorShift64Star::new(0xC11);
    let buf = SampleBuffer::new(random_pcm(&mut rng, 62500), FS).unwrap();
    let mags = dft_magnitudes(&buf, buf.len()).unwrap();
    let freq: f64 = mags.iter().map(|m| m * m).sum();
    let time: f64 = buf.samples().iter().map(|x| x * x).sum::<f64>() * buf.len() as f64;
    let rel = (freq / time - 1.0).abs();
    ensure(rel < 1e-6, || format!("Parseval relative error {rel}"))?;
    for f in [1000.0, 5000.0, 10000.0, 20000.0, 26000.0, 31000.0] {
        let tone = synth_tone(f, 1000.0, FS, 1.0, 0.7).unwrap();
        let peak = peak_bin(&spectrum(&tone, tone.len()).unwrap()).unwrap();
        ensure(peak.freq_hz == f, || format!("{f} Hz tone peaks at {}", peak.freq_hz))?;
    }
    Ok(format!("Parseval relative error {rel:.1e}; argmax exact for 6 tones"))
}

fn main() -> ExitCode {
    fn timed(name: &'static str, f: fn() -> Outcome) -> (&'static str, Outcome, Duration) {
        let t = Instant::now();
        let r = f();
        (name, r, t.elapsed())
    }
    let mut results = vec![
        timed("1 coefficient fidelity", c1_coefficient),
        timed("2 filter vs analytic oracle", c2_filter_vs_oracle),
        timed("3 ultrasonic selectivity", c3_selectivity),
        timed("4 streaming exactness", c4_streaming),
        timed("5 general IIR subsumption", c5_iir_subsumption),
        timed("6 RMS identities", c6_rms_identities),
    ];
    let t = Instant::now();
    let (c7, c8) = c7_c8_scenes();
    let dt = t.elapsed();
    results.push(("7 three-phase scene detection", c7, dt));
    results.push(("8 audibility masking", c8, dt));
    results.push(timed("9 link budget", c9_link_budget));
    results.push(timed("10 I/O bit-exactness", c10_io));
    results.push(timed("11 spectrum oracle", c11_spectrum));

    let mut failed = 0;
    for (name, outcome, dt) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{:.2} s]", dt.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{:.2} s]", dt.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
