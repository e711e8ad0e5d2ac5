//! Leak decisions from a windowed-RMS series.
//!
//! The baseline is the median of the first `baseline_windows` reports and is
//! frozen afterwards. An event opens once `min_trigger_windows` consecutive
//! reports reach `trigger_factor·baseline` and stays open until a report
//! falls below `release_factor·baseline`. Because every threshold is a
//! multiple of the baseline, decisions do not depend on the signal's scale.

use crate::dsp::RmsReport;
use crate::error::{Error, Result};
use crate::synth::{Annotation, PhaseLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub baseline_windows: usize,
    pub trigger_factor: f64,
    pub release_factor: f64,
    pub min_trigger_windows: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self { baseline_windows: 10, trigger_factor: 3.0, release_factor: 2.0, min_trigger_windows: 2 }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.baseline_windows < 2 {
            return Err(Error::invalid("baseline_windows must be at least 2"));
        }
        if self.min_trigger_windows == 0 {
            return Err(Error::invalid("min_trigger_windows must be at least 1"));
        }
        if !(self.trigger_factor.is_finite() && self.trigger_factor > 1.0) {
            return Err(Error::invalid(format!("trigger_factor must exceed 1, got {}", self.trigger_factor)));
        }
        if !(self.release_factor > 1.0 && self.release_factor <= self.trigger_factor) {
            return Err(Error::invalid(format!(
                "release_factor must lie in (1, trigger_factor], got {}",
                self.release_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub peak_rms: f64,
    pub mean_rms: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Median and median absolute deviation of the first `n` reports.
pub fn estimate_baseline(reports: &[RmsReport], n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid("baseline needs at least 2 reports"));
    }
    if reports.len() < n {
        return Err(Error::InsufficientData { needed: n, available: reports.len() });
    }
    let mut values: Vec<f64> = reports[..n].iter().map(|r| r.rms).collect();
    let baseline = median(&mut values);
    let mut deviations: Vec<f64> = values.iter().map(|v| (v - baseline).abs()).collect();
    Ok((baseline, median(&mut deviations)))
}

/// Start time of report `i`: the end of the report before it.
fn window_start(reports: &[RmsReport], i: usize) -> f64 {
    if i > 0 {
        reports[i - 1].t_end_s
    } else if reports.len() > 1 {
        (2.0 * reports[0].t_end_s - reports[1].t_end_s).max(0.0)
    } else {
        0.0
    }
}

pub fn detect(reports: &[RmsReport], config: &DetectorConfig) -> Result<Vec<DetectionEvent>> {
    config.validate()?;
    if reports.len() <= config.baseline_windows {
        return Err(Error::InsufficientData { needed: config.baseline_windows + 1, available: reports.len() });
    }
    let (baseline, _) = estimate_baseline(reports, config.baseline_windows)?;
    let trigger = config.trigger_factor * baseline;
    let release = config.release_factor * baseline;
    // A zero baseline would make every report qualify; silence must not.
    let qualifies = |rms: f64| rms >= trigger && rms > 0.0;
    let holds = |rms: f64| rms >= release && rms > 0.0;

    let mut events = Vec::new();
    let mut run_start: Option<usize> = None;
    let mut open: Option<usize> = None;

    let close = |from: usize, to: usize| {
        let span = &reports[from..=to];
        let peak = span.iter().fold(0.0f64, |m, r| m.max(r.rms));
        let mean = span.iter().map(|r| r.rms).sum::<f64>() / span.len() as f64;
        DetectionEvent {
            t_start_s: window_start(reports, from),
            t_end_s: reports[to].t_end_s,
            peak_rms: peak,
            mean_rms: mean.min(peak),
        }
    };

    for (i, report) in reports.iter().enumerate().skip(config.baseline_windows) {
        let rms = report.rms;
        match open {
            Some(start) => {
                if !holds(rms) {
                    events.push(close(start, i - 1));
                    open = None;
                }
            }
            None => {
                if qualifies(rms) {
                    let first = *run_start.get_or_insert(i);
                    if i + 1 - first >= config.min_trigger_windows {
                        open = Some(first);
                        run_start = None;
                    }
                } else {
                    run_start = None;
                }
            }
        }
    }
    if let Some(start) = open {
        events.push(close(start, reports.len() - 1));
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Score {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `event.t_start − phase.t_start` for each detected leak phase, using
    /// the earliest overlapping event.
    pub detection_latency_s: Vec<f64>,
}

impl Score {
    pub fn max_latency_s(&self) -> Option<f64> {
        self.detection_latency_s.iter().copied().reduce(f64::max)
    }
}

fn overlaps(e: &DetectionEvent, a: &Annotation) -> bool {
    e.t_start_s < a.t_end_s && a.t_start_s < e.t_end_s
}

pub fn score(events: &[DetectionEvent], truth: &[Annotation]) -> Score {
    let leaks: Vec<&Annotation> = truth.iter().filter(|a| a.label == PhaseLabel::NoisePlusLeak).collect();
    let mut s = Score::default();
    for e in events {
        if leaks.iter().any(|a| overlaps(e, a)) {
            s.true_positives += 1;
        } else {
            s.false_positives += 1;
        }
    }
    for a in leaks {
        let first = events.iter().filter(|e| overlaps(e, a)).map(|e| e.t_start_s).reduce(f64::min);
        match first {
            Some(t) => s.detection_latency_s.push(t - a.t_start_s),
            None => s.false_negatives += 1,
        }
    }
    s
}
