//! Plain-text tables for external plotting. All numbers use six decimal
//! places and rows end in LF.

use std::io::{BufRead, Write};

use crate::detector::DetectionEvent;
use crate::dsp::{RmsReport, SampleBuffer, SpectrumBin};
use crate::error::{Error, Result};
use crate::synth::{Annotation, PhaseLabel};

pub const RMS_HEADER: &str = "t_s,rms";
pub const ANNOTATION_HEADER: &str = "label,t_start_s,t_end_s";
pub const EVENT_HEADER: &str = "t_start_s,t_end_s,peak_rms,mean_rms";
pub const SPECTRUM_HEADER: &str = "freq_hz,magnitude";
pub const SAMPLE_HEADER: &str = "t_s,sample";

pub fn csv_export<W: Write>(reports: &[RmsReport], mut sink: W) -> Result<()> {
    writeln!(sink, "{RMS_HEADER}")?;
    for r in reports {
        writeln!(sink, "{:.6},{:.6}", r.t_end_s, r.rms)?;
    }
    sink.flush()?;
    Ok(())
}

/// Reads rows of `t_s,rms`. The CSV carries no window length, so
/// `n_samples` is reconstructed from consecutive time stamps at `sample_rate_hz`.
pub fn csv_import<R: BufRead>(source: R, sample_rate_hz: f64) -> Result<Vec<RmsReport>> {
    let rows = read_table(source, RMS_HEADER, 2)?;
    let mut reports = Vec::with_capacity(rows.len());
    let mut prev_t = 0.0;
    for (line, fields) in rows {
        let t = number(&fields[0], line)?;
        let rms = number(&fields[1], line)?;
        if rms < 0.0 {
            return Err(Error::MalformedCsv { line, detail: format!("negative rms {rms}") });
        }
        if t <= prev_t && !reports.is_empty() {
            return Err(Error::MalformedCsv { line, detail: format!("time {t} does not increase") });
        }
        let n_samples = (((t - prev_t) * sample_rate_hz).round() as usize).max(1);
        reports.push(RmsReport { t_end_s: t, rms, n_samples });
        prev_t = t;
    }
    Ok(reports)
}

pub fn annotations_export<W: Write>(annotations: &[Annotation], mut sink: W) -> Result<()> {
    writeln!(sink, "{ANNOTATION_HEADER}")?;
    for a in annotations {
        writeln!(sink, "{},{:.6},{:.6}", a.label, a.t_start_s, a.t_end_s)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn annotations_import<R: BufRead>(source: R) -> Result<Vec<Annotation>> {
    read_table(source, ANNOTATION_HEADER, 3)?
        .into_iter()
        .map(|(line, f)| {
            let label: PhaseLabel =
                f[0].parse().map_err(|e: Error| Error::MalformedCsv { line, detail: e.to_string() })?;
            Ok(Annotation { label, t_start_s: number(&f[1], line)?, t_end_s: number(&f[2], line)? })
        })
        .collect()
}

pub fn events_export<W: Write>(events: &[DetectionEvent], mut sink: W) -> Result<()> {
    writeln!(sink, "{EVENT_HEADER}")?;
    for e in events {
        writeln!(sink, "{:.6},{:.6},{:.6},{:.6}", e.t_start_s, e.t_end_s, e.peak_rms, e.mean_rms)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn spectrum_export<W: Write>(bins: &[SpectrumBin], mut sink: W) -> Result<()> {
    writeln!(sink, "{SPECTRUM_HEADER}")?;
    for b in bins {
        writeln!(sink, "{:.6},{:.6}", b.freq_hz, b.magnitude)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn samples_export<W: Write>(buffer: &SampleBuffer, mut sink: W) -> Result<()> {
    writeln!(sink, "{SAMPLE_HEADER}")?;
    let fs = buffer.sample_rate_hz();
    for (i, s) in buffer.samples().iter().enumerate() {
        writeln!(sink, "{:.6},{:.6}", i as f64 / fs, s)?;
    }
    sink.flush()?;
    Ok(())
}

fn number(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::MalformedCsv { line, detail: format!("not a number: {field:?}") })
}

fn read_table<R: BufRead>(source: R, header: &str, width: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = source.lines();
    match lines.next() {
        Some(first) => {
            let first = first?;
            if first.trim_end_matches('\r') != header {
                return Err(Error::MalformedCsv {
                    line: 1,
                    detail: format!("expected header {header:?}, found {first:?}"),
                });
            }
        }
        None => return Err(Error::MalformedCsv { line: 1, detail: "missing header".into() }),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_owned).collect();
        if fields.len() != width {
            return Err(Error::MalformedCsv {
                line: line_no,
                detail: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        rows.push((line_no, fields));
    }
    Ok(rows)
}
