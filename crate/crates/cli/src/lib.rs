//! `ultraleak` command line: composes the library into file and pipe based
//! workflows. [`run`] is the whole program; `main` only forwards the exit code.
//!
//! Exit codes: 0 success, 1 I/O or format error, 2 argument error, 4 when
//! `detect --fail-on-leak` reports at least one event.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use ultraleak::defaults;
use ultraleak::detector::{detect, score, DetectorConfig};
use ultraleak::dsp::{
    design_highpass, highpass_buffer, peak_bin, spectrum, windowed_rms, windowed_rms_unfiltered, FilterState,
    SampleBuffer,
};
use ultraleak::stream::{
    annotations_export, annotations_import, csv_export, csv_import, events_export, frame_encode, link_budget, quantize,
    raw_pcm_read, samples_export, spectrum_export, wav_read, wav_write, DecodeEvent, FrameDecoder, Framing,
};
use ultraleak::synth::{
    compose_scene, PhaseLabel, Scene, ScenePhase, DEFAULT_FLOOR_AMPLITUDE, DEFAULT_LEAK_AMPLITUDE,
    DEFAULT_LEAK_FREQ_HZ, DEFAULT_NOISE_AMPLITUDE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LEAK: i32 = 4;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Open { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Lib(#[from] ultraleak::Error),

    #[error("leak detected")]
    LeakFound,
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::LeakFound => EXIT_LEAK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(ultraleak::Error::InvalidArgument(_) | ultraleak::Error::Aliasing { .. }) => EXIT_USAGE,
            CliError::Open { .. } | CliError::Lib(_) => EXIT_FAILURE,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ultraleak", version, about = "Ultrasonic leak detection: synthesize, filter, measure, detect")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic scene to a 16-bit WAV file.
    Synth(SynthArgs),
    /// High-pass filter a WAV file.
    Filter(FilterArgs),
    /// Windowed RMS of a WAV file as `t_s,rms` CSV.
    Rms(RmsArgs),
    /// Threshold detector over an RMS CSV; writes events CSV.
    Detect(DetectArgs),
    /// One-sided magnitude spectrum of a WAV file as CSV.
    Spectrum(SpectrumArgs),
    /// Serial link throughput against the capture rate.
    Budget(BudgetArgs),
    /// Framed (or raw) serial PCM stream to WAV.
    Ingest(IngestArgs),
    /// WAV samples as `t_s,sample` CSV.
    Wav2csv(Wav2CsvArgs),
    /// WAV to framed (or raw) serial PCM stream.
    Encode(EncodeArgs),
}

#[derive(Debug, Args)]
struct Io {
    /// Input path, `-` for stdin
    #[arg(short, long, default_value = "-")]
    input: PathBuf,
    /// Output path, `-` for stdout
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Comma-separated `label:seconds` list; labels silence, noise, leak
    #[arg(long, default_value = "silence:2,noise:3,leak:3")]
    phases: String,
    #[arg(long, default_value_t = defaults::SAMPLE_RATE_HZ)]
    fs: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NOISE_AMPLITUDE)]
    noise_amp: f64,
    #[arg(long, default_value_t = DEFAULT_LEAK_AMPLITUDE)]
    leak_amp: f64,
    #[arg(long, default_value_t = DEFAULT_LEAK_FREQ_HZ)]
    leak_freq: f64,
    /// Sensor floor amplitude added to every phase
    #[arg(long, default_value_t = DEFAULT_FLOOR_AMPLITUDE)]
    floor_amp: f64,
    /// Also write per-phase ground truth CSV here
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = defaults::CUTOFF_HZ)]
    cutoff: f64,
}

#[derive(Debug, Args)]
struct RmsArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = defaults::CUTOFF_HZ)]
    cutoff: f64,
    #[arg(long, default_value_t = defaults::WINDOW_MS)]
    window_ms: f64,
    /// Measure the raw signal instead of the high-passed one
    #[arg(long)]
    no_filter: bool,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    io: Io,
    /// Sample rate the RMS series was measured at
    #[arg(long, default_value_t = defaults::SAMPLE_RATE_HZ)]
    fs: f64,
    #[arg(long, default_value_t = DetectorConfig::default().baseline_windows)]
    baseline_windows: usize,
    #[arg(long, default_value_t = DetectorConfig::default().trigger_factor)]
    trigger_factor: f64,
    #[arg(long, default_value_t = DetectorConfig::default().release_factor)]
    release_factor: f64,
    #[arg(long, default_value_t = DetectorConfig::default().min_trigger_windows)]
    min_trigger_windows: usize,
    /// Exit with status 4 if any event is found
    #[arg(long)]
    fail_on_leak: bool,
    /// Ground truth annotations CSV; prints a score to stderr
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    io: Io,
    /// Transform length; defaults to every sample after the offset
    #[arg(short, long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    offset_s: f64,
    /// High-pass the signal before the transform
    #[arg(long)]
    filter: bool,
    #[arg(long, default_value_t = defaults::CUTOFF_HZ)]
    cutoff: f64,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = defaults::SAMPLE_RATE_HZ)]
    fs: f64,
    #[arg(long, default_value_t = 16)]
    bits: u32,
    #[arg(long, default_value_t = defaults::BAUD)]
    baud: f64,
    #[arg(long, default_value = "8N1")]
    framing: String,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = defaults::SAMPLE_RATE_HZ)]
    fs: f64,
    /// Input is headerless little-endian i16 rather than frames
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Args)]
struct Wav2CsvArgs {
    #[command(flatten)]
    io: Io,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[command(flatten)]
    io: Io,
    /// Samples per frame
    #[arg(long, default_value_t = defaults::CHUNK_SAMPLES)]
    chunk: usize,
    /// Emit headerless little-endian i16 instead of frames
    #[arg(long)]
    raw: bool,
}

/// Parses `argv` (including the program name) and executes it.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        // downstream of a pipe stopped reading, e.g. `| head`
        Err(CliError::Lib(ultraleak::Error::Io(e))) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("ultraleak: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Filter(a) => filter(a),
        Command::Rms(a) => rms(a),
        Command::Detect(a) => detect_cmd(a),
        Command::Spectrum(a) => spectrum_cmd(a),
        Command::Budget(a) => budget(a),
        Command::Ingest(a) => ingest(a),
        Command::Wav2csv(a) => wav2csv(a),
        Command::Encode(a) => encode(a),
    }
}

fn is_std(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open_input(path: &Path) -> CliResult<Box<dyn BufRead>> {
    if is_std(path) {
        return Ok(Box::new(BufReader::new(io::stdin().lock())));
    }
    let file = File::open(path).map_err(|source| CliError::Open { path: path.to_owned(), source })?;
    Ok(Box::new(BufReader::new(file)))
}

/// Writes through `body` and flushes, so write errors surface as failures.
fn with_output(path: &Path, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    if is_std(path) {
        let mut out = BufWriter::new(io::stdout().lock());
        body(&mut out)?;
        out.flush()?;
    } else {
        let file = File::create(path).map_err(|source| CliError::Open { path: path.to_owned(), source })?;
        let mut out = BufWriter::new(file);
        body(&mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn read_wav(path: &Path) -> CliResult<SampleBuffer> {
    Ok(wav_read(open_input(path)?)?)
}

fn parse_phases(spec: &str, a: &SynthArgs) -> CliResult<Vec<ScenePhase>> {
    spec.split(',')
        .map(|item| {
            let (label, secs) =
                item.split_once(':').ok_or_else(|| CliError::Usage(format!("phase {item:?} is not label:seconds")))?;
            let label: PhaseLabel = label.trim().parse()?;
            let duration_s: f64 =
                secs.trim().parse().map_err(|_| CliError::Usage(format!("phase duration {secs:?} is not a number")))?;
            Ok(match label {
                PhaseLabel::Silence => ScenePhase::silence(duration_s),
                PhaseLabel::Noise => ScenePhase::noise(duration_s, a.noise_amp),
                PhaseLabel::NoisePlusLeak => {
                    ScenePhase::noise_plus_leak(duration_s, a.noise_amp, a.leak_amp, a.leak_freq)
                }
            })
        })
        .collect()
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let mut scene = Scene::new(parse_phases(&a.phases, &a)?, a.fs, a.seed);
    scene.floor_amplitude = a.floor_amp;
    let (buffer, annotations) = compose_scene(&scene)?;
    with_output(&a.output, |out| Ok(wav_write(&buffer, out)?))?;
    if let Some(path) = &a.annotations {
        with_output(path, |out| Ok(annotations_export(&annotations, out)?))?;
    }
    Ok(())
}

fn filter(a: FilterArgs) -> CliResult<()> {
    let input = read_wav(&a.io.input)?;
    let design = design_highpass(a.cutoff, input.sample_rate_hz())?;
    let (_, output) = highpass_buffer(&design, FilterState::new(), &input)?;
    with_output(&a.io.output, |out| Ok(wav_write(&output, out)?))
}

fn rms(a: RmsArgs) -> CliResult<()> {
    let input = read_wav(&a.io.input)?;
    let reports = if a.no_filter {
        windowed_rms_unfiltered(&input, a.window_ms)?
    } else {
        windowed_rms(&design_highpass(a.cutoff, input.sample_rate_hz())?, &input, a.window_ms)?
    };
    with_output(&a.io.output, |out| Ok(csv_export(&reports, out)?))
}

fn detect_cmd(a: DetectArgs) -> CliResult<()> {
    let config = DetectorConfig {
        baseline_windows: a.baseline_windows,
        trigger_factor: a.trigger_factor,
        release_factor: a.release_factor,
        min_trigger_windows: a.min_trigger_windows,
    };
    config.validate()?;
    let reports = csv_import(open_input(&a.io.input)?, a.fs)?;
    let events = detect(&reports, &config)?;
    with_output(&a.io.output, |out| Ok(events_export(&events, out)?))?;
    if let Some(path) = &a.truth {
        let truth = annotations_import(open_input(path)?)?;
        let s = score(&events, &truth);
        let latency = s.max_latency_s().map_or_else(|| "n/a".to_owned(), |l| format!("{l:.3}"));
        eprintln!(
            "true_positives={} false_positives={} false_negatives={} max_latency_s={latency}",
            s.true_positives, s.false_positives, s.false_negatives
        );
    }
    if a.fail_on_leak && !events.is_empty() {
        return Err(CliError::LeakFound);
    }
    Ok(())
}

fn spectrum_cmd(a: SpectrumArgs) -> CliResult<()> {
    if !(a.offset_s >= 0.0 && a.offset_s.is_finite()) {
        return Err(CliError::Usage(format!("offset {} s must be a finite non-negative time", a.offset_s)));
    }
    let mut input = read_wav(&a.io.input)?;
    if a.filter {
        let design = design_highpass(a.cutoff, input.sample_rate_hz())?;
        input = highpass_buffer(&design, FilterState::new(), &input)?.1;
    }
    let start = ((a.offset_s * input.sample_rate_hz()).round() as usize).min(input.len());
    let tail = input.slice(start..input.len());
    let bins = spectrum(&tail, a.n.unwrap_or(tail.len()))?;
    if let Some(p) = peak_bin(&bins[1..]) {
        eprintln!("peak {:.3} Hz magnitude {:.6e}", p.freq_hz, p.magnitude);
    }
    with_output(&a.io.output, |out| Ok(spectrum_export(&bins, out)?))
}

fn budget(a: BudgetArgs) -> CliResult<()> {
    let framing: Framing = a.framing.parse()?;
    let b = link_budget(a.fs, a.bits, a.baud, framing)?;
    let mut out = io::stdout().lock();
    writeln!(out, "capture_rate_bps={}", b.capture_rate_bps)?;
    writeln!(out, "link_rate_bps={}", b.link_rate_bps)?;
    writeln!(out, "duty_cycle={:.5}", b.duty_cycle)?;
    writeln!(out, "lossless={}", b.lossless_continuous)?;
    Ok(())
}

fn ingest(a: IngestArgs) -> CliResult<()> {
    if !(a.fs > 0.0 && a.fs.is_finite()) {
        return Err(CliError::Usage(format!("sample rate {} Hz must be positive", a.fs)));
    }
    let mut source = open_input(&a.io.input)?;
    let pcm = if a.raw {
        raw_pcm_read(source)?
    } else {
        let mut decoder = FrameDecoder::new();
        let mut pcm = Vec::new();
        let (mut frames, mut missing, mut discarded) = (0u64, 0u64, 0u64);
        let mut tally = |events: Vec<DecodeEvent>, pcm: &mut Vec<i16>| {
            for e in events {
                match e {
                    DecodeEvent::Frame(f) => {
                        frames += 1;
                        pcm.extend_from_slice(&f.samples);
                    }
                    DecodeEvent::Gap { .. } => missing += u64::from(e.missing_frames().unwrap_or(0)),
                    DecodeEvent::Discarded { .. } => discarded += 1,
                }
            }
        };
        let mut chunk = vec![0u8; 1 << 16];
        loop {
            let n = match source.read(&mut chunk) {
                Ok(0) => break,
                Ok(n) => n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e.into()),
            };
            tally(decoder.push(&chunk[..n]), &mut pcm);
        }
        tally(decoder.finish(), &mut pcm);
        eprintln!("frames={frames} missing_frames={missing} discarded={discarded}");
        pcm
    };
    let buffer = SampleBuffer::from_pcm(&pcm, a.fs)?;
    with_output(&a.io.output, |out| Ok(wav_write(&buffer, out)?))
}

fn wav2csv(a: Wav2CsvArgs) -> CliResult<()> {
    let input = read_wav(&a.io.input)?;
    with_output(&a.io.output, |out| Ok(samples_export(&input, out)?))
}

fn encode(a: EncodeArgs) -> CliResult<()> {
    if a.chunk == 0 {
        return Err(CliError::Usage("--chunk must be at least 1".into()));
    }
    let input = read_wav(&a.io.input)?;
    let pcm: Vec<i16> = input.samples().iter().map(|&x| quantize(x)).collect();
    with_output(&a.io.output, |out| {
        if a.raw {
            for s in &pcm {
                out.write_all(&s.to_le_bytes())?;
            }
            return Ok(());
        }
        for (seq, chunk) in pcm.chunks(a.chunk).enumerate() {
            let seq = u32::try_from(seq).map_err(|_| CliError::Usage("too many frames for a u32 sequence".into()))?;
            out.write_all(&frame_encode(seq, chunk)?)?;
        }
        Ok(())
    })
}
