//! Waveform quality metrics computed from a closed-loop trace.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::Trace;

pub const DEFAULT_MAX_HARMONIC: usize = 50;

/// Default settle band (V).
pub const DEFAULT_SETTLE_BAND: f64 = 5.0;

/// Per-switch switching frequency: 0↔1 transitions over twice the observed
/// duration. Bounded by `1/(2·t_s)`.
pub fn switching_frequency(trace: &Trace) -> [f64; 3] {
    let span = trace.duration();
    if span <= 0.0 {
        return [0.0; 3];
    }
    let mut flips = [0usize; 3];
    for w in trace.records.windows(2) {
        let a = w[0].switch_state.bits();
        let b = w[1].switch_state.bits();
        for p in 0..3 {
            if a[p] != b[p] {
                flips[p] += 1;
            }
        }
    }
    flips.map(|n| n as f64 / (2.0 * span))
}

fn integer_cycles(n: usize, f0: f64, fs: f64) -> Result<usize> {
    let cycles = n as f64 * f0 / fs;
    let rounded = cycles.round();
    if rounded < 1.0 || (cycles - rounded).abs() > 1e-6 {
        return Err(Error::config(format!(
            "THD window must hold an integer number (>= 1) of fundamental cycles, got {cycles}"
        )));
    }
    Ok(rounded as usize)
}

/// Peak amplitudes of harmonics `1..=max_harmonic` by direct DFT over a
/// window holding an integer number of fundamental cycles.
pub fn harmonic_amplitudes(samples: &[f64], f0: f64, fs: f64, max_harmonic: usize) -> Result<Vec<f64>> {
    if !(f0 > 0.0 && fs > 0.0) || max_harmonic == 0 {
        return Err(Error::config("THD needs f0 > 0, fs > 0 and max_harmonic >= 1"));
    }
    if fs <= 2.0 * max_harmonic as f64 * f0 {
        return Err(Error::config(format!(
            "sampling rate {fs} Hz cannot resolve harmonic {max_harmonic} of {f0} Hz"
        )));
    }
    let n = samples.len();
    let cycles = integer_cycles(n, f0, fs)?;
    let amps = (1..=max_harmonic)
        .map(|h| {
            let bin = h * cycles;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &x) in samples.iter().enumerate() {
                // reduce the phase index exactly before converting to an angle
                let ang = TAU * ((bin * i) % n) as f64 / n as f64;
                re += x * ang.cos();
                im -= x * ang.sin();
            }
            2.0 * re.hypot(im) / n as f64
        })
        .collect();
    Ok(amps)
}

/// Total harmonic distortion `sqrt(Σ_{h≥2} A_h²) / A_1`.
pub fn thd(samples: &[f64], f0: f64, fs: f64, max_harmonic: usize) -> Result<f64> {
    let amps = harmonic_amplitudes(samples, f0, fs, max_harmonic)?;
    let fundamental = amps[0];
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt();
    if fundamental <= 1e-12 * rms.max(f64::MIN_POSITIVE) || fundamental == 0.0 {
        return Err(Error::numeric("signal has no fundamental component"));
    }
    let harmonics: f64 = amps[1..].iter().map(|a| a * a).sum();
    Ok(harmonics.sqrt() / fundamental)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingMetrics {
    pub rms_error_v_bn: f64,
    pub rms_error_v_cn: f64,
    /// Largest absolute tracking error on either phase (V).
    pub peak_ripple: f64,
}

fn warmup_start(trace: &Trace, warmup_cycles: usize) -> f64 {
    warmup_cycles as f64 / trace.schedule.initial_freq()
}

/// RMS and peak tracking error after the warm-up cycles.
pub fn tracking_metrics(trace: &Trace, warmup_cycles: usize) -> Result<TrackingMetrics> {
    let start = warmup_start(trace, warmup_cycles) - 1e-9 * trace.t_s;
    let window: Vec<_> = trace.records.iter().filter(|r| r.t >= start).collect();
    if window.is_empty() {
        return Err(Error::config("trace is not longer than the warm-up"));
    }
    let n = window.len() as f64;
    let (mut sb, mut sc, mut peak) = (0.0, 0.0, 0.0f64);
    for r in &window {
        let eb = r.x.v_bn - r.v_bn_ref;
        let ec = r.x.v_cn - r.v_cn_ref;
        sb += eb * eb;
        sc += ec * ec;
        peak = peak.max(eb.abs()).max(ec.abs());
    }
    Ok(TrackingMetrics {
        rms_error_v_bn: (sb / n).sqrt(),
        rms_error_v_cn: (sc / n).sqrt(),
        peak_ripple: peak,
    })
}

/// First sample time at or after `event_time` from which both phases stay
/// within `band` of their references for one full period of the post-event
/// reference. `None` if that never happens inside the trace.
pub fn settle_time(trace: &Trace, event_time: f64, band: f64) -> Option<f64> {
    let recs = &trace.records;
    let first = recs.iter().position(|r| r.t >= event_time - 1e-9 * trace.t_s)?;
    let period = 1.0 / trace.schedule.freq_at(event_time);
    let hold = (period / trace.t_s).round() as usize;
    let in_band: Vec<bool> = recs
        .iter()
        .map(|r| (r.x.v_bn - r.v_bn_ref).abs() <= band && (r.x.v_cn - r.v_cn_ref).abs() <= band)
        .collect();
    // run[i] = number of consecutive in-band samples starting at i
    let mut run = vec![0usize; recs.len() + 1];
    for i in (0..recs.len()).rev() {
        run[i] = if in_band[i] { run[i + 1] + 1 } else { 0 };
    }
    (first..recs.len()).find(|&i| run[i] > hold).map(|i| recs[i].t)
}

/// Sample range `[start, end)` used for THD: the last whole fundamental
/// cycles after the warm-up and after the last reference change.
pub fn thd_window(trace: &Trace, warmup_cycles: usize) -> Result<(usize, usize, f64)> {
    let recs = &trace.records;
    let last_t = recs.last().map(|r| r.t).unwrap_or(0.0);
    let seg_start = trace.schedule.segment_start(last_t);
    let start_t = warmup_start(trace, warmup_cycles).max(seg_start) - 1e-9 * trace.t_s;
    let start = recs
        .iter()
        .position(|r| r.t >= start_t)
        .ok_or_else(|| Error::config("no samples after the warm-up"))?;
    let f0 = trace.schedule.freq_at(last_t);
    let fs = 1.0 / trace.t_s;
    let per_cycle = fs / f0;
    let available = recs.len() - start;
    let max_cycles = (available as f64 / per_cycle + 1e-9).floor() as usize;
    for m in (1..=max_cycles).rev() {
        let len = m as f64 * per_cycle;
        if (len - len.round()).abs() < 1e-6 {
            let len = len.round() as usize;
            return Ok((recs.len() - len, recs.len(), f0));
        }
    }
    Err(Error::config("post-warm-up window holds no integer number of cycles on the sample grid"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub thd_v_ab: Option<f64>,
    pub thd_v_bc: Option<f64>,
    pub thd_v_ca: Option<f64>,
    pub rms_error_v_bn: f64,
    pub rms_error_v_cn: f64,
    pub peak_ripple: f64,
    pub fsw_per_switch: [f64; 3],
    /// Absolute time at which tracking settles after the first reference
    /// step, see [`settle_time`].
    pub settle_time: Option<f64>,
}

impl MetricsReport {
    /// Mean THD over the three line voltages, if all are defined.
    pub fn mean_thd(&self) -> Option<f64> {
        Some((self.thd_v_ab? + self.thd_v_bc? + self.thd_v_ca?) / 3.0)
    }
}

/// All metrics for a trace. THD entries are `None` when the window holds no
/// fundamental (e.g. a zero-amplitude reference).
pub fn compute_metrics(trace: &Trace, warmup_cycles: usize, max_harmonic: usize, settle_band: f64) -> Result<MetricsReport> {
    let tracking = tracking_metrics(trace, warmup_cycles)?;
    let (start, end, f0) = thd_window(trace, warmup_cycles)?;
    let fs = 1.0 / trace.t_s;
    let window = &trace.records[start..end];
    let line_thd = |pick: fn(&crate::sim::TraceRecord) -> f64| -> Result<Option<f64>> {
        let samples: Vec<f64> = window.iter().map(pick).collect();
        match thd(&samples, f0, fs, max_harmonic) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Numeric { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let settle = trace
        .schedule
        .first_event_time()
        .and_then(|t| settle_time(trace, t, settle_band));
    Ok(MetricsReport {
        thd_v_ab: line_thd(|r| r.v_ab)?,
        thd_v_bc: line_thd(|r| r.v_bc)?,
        thd_v_ca: line_thd(|r| r.v_ca)?,
        rms_error_v_bn: tracking.rms_error_v_bn,
        rms_error_v_cn: tracking.rms_error_v_cn,
        peak_ripple: tracking.peak_ripple,
        fsw_per_switch: switching_frequency(trace),
        settle_time: settle,
    })
}
