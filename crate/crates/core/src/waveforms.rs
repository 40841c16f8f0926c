//! DC-biased phase references, the balanced line-to-line set they produce,
//! and the matching load currents.
//!
//! Phase A sits at `v_dc`; phases B and C are `v_dc` plus sinusoids 60°
//! apart, which makes the three line-to-line voltages a balanced set of
//! amplitude `v_m`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this fraction of `v_dc` the amplitude is accepted with a warning.
pub const LOW_AMPLITUDE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    /// Peak line-to-line voltage (V).
    pub v_m: f64,
    pub v_dc: f64,
    /// Fundamental frequency (Hz).
    pub freq: f64,
    /// Load power-factor angle (rad).
    pub phi_load: f64,
    /// Peak load current (A).
    pub i_m: f64,
}

impl ReferenceConfig {
    /// Resistive load: `phi_load = 0`, `i_m = v_m / r_load`.
    pub fn resistive(v_m: f64, v_dc: f64, freq: f64, r_load: f64) -> Self {
        ReferenceConfig {
            v_m,
            v_dc,
            freq,
            phi_load: 0.0,
            i_m: v_m / r_load,
        }
    }

    pub fn omega(&self) -> f64 {
        TAU * self.freq
    }

    /// Checks everything except the amplitude window.
    pub fn validate(&self) -> Result<()> {
        if !(self.freq.is_finite() && self.freq > 0.0) {
            return Err(Error::config(format!("reference.freq must be > 0, got {}", self.freq)));
        }
        if !(self.i_m.is_finite() && self.i_m >= 0.0) {
            return Err(Error::config(format!("reference.i_m must be >= 0, got {}", self.i_m)));
        }
        if !self.phi_load.is_finite() {
            return Err(Error::config("reference.phi_load must be finite"));
        }
        if !(self.v_dc.is_finite() && self.v_dc > 0.0) {
            return Err(Error::config(format!("reference.v_dc must be > 0, got {}", self.v_dc)));
        }
        Ok(())
    }
}

/// `(v_an, v_bn, v_cn)` for a fundamental angle `theta = ωt`.
pub fn phase_references_at_angle(theta: f64, v_m: f64, v_dc: f64) -> (f64, f64, f64) {
    (
        v_dc,
        v_dc + v_m * theta.sin(),
        v_dc + v_m * (theta - FRAC_PI_3).sin(),
    )
}

pub fn phase_references(t: f64, cfg: &ReferenceConfig) -> (f64, f64, f64) {
    phase_references_at_angle(cfg.omega() * t, cfg.v_m, cfg.v_dc)
}

/// `(v_ab, v_bc, v_ca)`.
pub fn line_voltages(t: f64, cfg: &ReferenceConfig) -> (f64, f64, f64) {
    let wt = cfg.omega() * t;
    (
        cfg.v_m * (wt + PI).sin(),
        cfg.v_m * (wt + FRAC_PI_3).sin(),
        cfg.v_m * (wt - FRAC_PI_3).sin(),
    )
}

/// `(i_a, i_b, i_c)`.
pub fn load_currents(t: f64, cfg: &ReferenceConfig) -> (f64, f64, f64) {
    let a = cfg.omega() * t - cfg.phi_load;
    (
        cfg.i_m * (a + 5.0 * FRAC_PI_6).sin(),
        cfg.i_m * (a + FRAC_PI_6).sin(),
        cfg.i_m * (a - FRAC_PI_2).sin(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeStatus {
    Ok,
    /// Accepted, but below `LOW_AMPLITUDE_FRACTION · v_dc`.
    LowAmplitude,
}

/// Enforces `0 <= v_m <= v_dc`.
pub fn validate_amplitude(cfg: &ReferenceConfig) -> Result<AmplitudeStatus> {
    check_amplitude(cfg.v_m, cfg.v_dc)
}

pub(crate) fn check_amplitude(v_m: f64, v_dc: f64) -> Result<AmplitudeStatus> {
    if !(v_m.is_finite() && v_m >= 0.0 && v_m <= v_dc) {
        return Err(Error::Constraint(format!(
            "peak line voltage must satisfy 0 <= v_m <= v_dc (v_m = {v_m}, v_dc = {v_dc})"
        )));
    }
    if v_m < LOW_AMPLITUDE_FRACTION * v_dc {
        Ok(AmplitudeStatus::LowAmplitude)
    } else {
        Ok(AmplitudeStatus::Ok)
    }
}

/// Step change of the reference amplitude and frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEvent {
    pub time: f64,
    pub v_m: f64,
    pub freq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    start: f64,
    angle0: f64,
    v_m: f64,
    freq: f64,
}

/// Piecewise reference with phase-continuous frequency steps. Evaluating
/// at any time, including after a pending event, is closed-form, so the
/// controller can look ahead across an event boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSchedule {
    v_dc: f64,
    segments: Vec<Segment>,
}

/// Event timestamps are compared with this slack so that `k·t_s` lands on
/// an event despite rounding.
const TIME_SLACK: f64 = 1e-12;

impl ReferenceSchedule {
    pub fn new(cfg: &ReferenceConfig, events: &[StepEvent]) -> Result<Self> {
        cfg.validate()?;
        check_amplitude(cfg.v_m, cfg.v_dc)?;
        let mut segments = vec![Segment {
            start: 0.0,
            angle0: 0.0,
            v_m: cfg.v_m,
            freq: cfg.freq,
        }];
        for ev in events {
            let last = *segments.last().expect("at least one segment");
            if !(ev.time.is_finite() && ev.time > last.start) {
                return Err(Error::config(format!(
                    "event times must be strictly increasing and > 0 (got {} after {})",
                    ev.time, last.start
                )));
            }
            if !(ev.freq.is_finite() && ev.freq > 0.0) {
                return Err(Error::config(format!("event frequency must be > 0, got {}", ev.freq)));
            }
            check_amplitude(ev.v_m, cfg.v_dc)?;
            segments.push(Segment {
                start: ev.time,
                angle0: last.angle0 + TAU * last.freq * (ev.time - last.start),
                v_m: ev.v_m,
                freq: ev.freq,
            });
        }
        Ok(ReferenceSchedule { v_dc: cfg.v_dc, segments })
    }

    fn segment(&self, t: f64) -> &Segment {
        self.segments
            .iter()
            .rev()
            .find(|s| s.start <= t + TIME_SLACK)
            .unwrap_or(&self.segments[0])
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        let s = self.segment(t);
        s.angle0 + TAU * s.freq * (t - s.start)
    }

    pub fn freq_at(&self, t: f64) -> f64 {
        self.segment(t).freq
    }

    pub fn v_m_at(&self, t: f64) -> f64 {
        self.segment(t).v_m
    }

    pub fn v_dc(&self) -> f64 {
        self.v_dc
    }

    pub fn initial_freq(&self) -> f64 {
        self.segments[0].freq
    }

    /// Time of the first step event, if any.
    pub fn first_event_time(&self) -> Option<f64> {
        self.segments.get(1).map(|s| s.start)
    }

    /// Start time of the segment active at `t`.
    pub fn segment_start(&self, t: f64) -> f64 {
        self.segment(t).start
    }

    pub fn phase_references(&self, t: f64) -> (f64, f64, f64) {
        let s = self.segment(t);
        phase_references_at_angle(s.angle0 + TAU * s.freq * (t - s.start), s.v_m, self.v_dc)
    }
}
