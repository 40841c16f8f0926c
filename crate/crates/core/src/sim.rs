//! Closed-loop simulation: controller and discrete plant stepped at the
//! sample time, with reference step events.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpc::{self, MpcConfig};
use crate::plant::{
    assemble_continuous, CircuitParams, ContinuousModel, InputVector, ModelBank, ModelVariant, StateVector,
    SwitchState,
};
use crate::waveforms::{ReferenceConfig, ReferenceSchedule, StepEvent};

/// Optional sinusoidal ripple on both intermediate-capacitor voltages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapRipple {
    /// Peak ripple (V).
    pub amplitude: f64,
    pub freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Simulated time (s).
    pub duration: f64,
    /// Fundamental cycles dropped from the start before computing metrics.
    pub warmup_cycles: usize,
    /// 1 uses the controller's own ZOH model as the plant; more integrates
    /// the continuous model with that many RK4 steps per sample.
    pub plant_substeps: usize,
    pub initial_state: StateVector,
    pub events: Vec<StepEvent>,
    pub cap_ripple: Option<CapRipple>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            duration: 0.2,
            warmup_cycles: 1,
            plant_substeps: 1,
            initial_state: StateVector::default(),
            events: Vec::new(),
            cap_ripple: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::config(format!("sim.duration must be > 0, got {}", self.duration)));
        }
        if self.plant_substeps == 0 {
            return Err(Error::config("sim.plant_substeps must be >= 1"));
        }
        if !self.initial_state.is_finite() {
            return Err(Error::config("sim.initial_state must be finite"));
        }
        if let Some(ev) = self.events.iter().find(|e| e.time >= self.duration) {
            return Err(Error::config(format!(
                "event at t={} is not before the end of the run ({})",
                ev.time, self.duration
            )));
        }
        if let Some(r) = self.cap_ripple {
            if !(r.amplitude.is_finite() && r.freq.is_finite() && r.freq >= 0.0) {
                return Err(Error::config("sim.cap_ripple needs finite amplitude and freq >= 0"));
            }
        }
        Ok(())
    }

    /// Number of samples after the initial one.
    pub fn steps(&self, t_s: f64) -> usize {
        (self.duration / t_s + 1e-9).floor() as usize
    }
}

/// Everything needed for one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub circuit: CircuitParams,
    pub variant: ModelVariant,
    pub mpc: MpcConfig,
    pub reference: ReferenceConfig,
    pub sim: SimConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        let circuit = CircuitParams::default();
        Scenario {
            reference: ReferenceConfig::resistive(100.0, circuit.v_dc, 50.0, circuit.r_load),
            circuit,
            variant: ModelVariant::ModeConsistent,
            mpc: MpcConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        self.mpc.validate()?;
        self.sim.validate()?;
        self.reference.validate()?;
        if self.reference.v_dc != self.circuit.v_dc {
            return Err(Error::config(format!(
                "reference v_dc ({}) must equal circuit v_dc ({})",
                self.reference.v_dc, self.circuit.v_dc
            )));
        }
        crate::waveforms::validate_amplitude(&self.reference)?;
        Ok(())
    }

    pub fn schedule(&self) -> Result<ReferenceSchedule> {
        ReferenceSchedule::new(&self.reference, &self.sim.events)
    }

    pub fn inputs_at(&self, t: f64) -> InputVector {
        let mut u = InputVector::nominal(self.circuit.v_dc);
        if let Some(r) = self.sim.cap_ripple {
            let dv = r.amplitude * (TAU * r.freq * t).sin();
            u.v_c1 += dv;
            u.v_c2 += dv;
        }
        u
    }
}

/// One sample of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    /// State applied from `t` to `t + t_s`.
    pub switch_state: SwitchState,
    pub x: StateVector,
    pub v_bn_ref: f64,
    pub v_cn_ref: f64,
    pub v_ab: f64,
    pub v_bc: f64,
    pub v_ca: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub t_s: f64,
    pub v_dc: f64,
    pub schedule: ReferenceSchedule,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn duration(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

/// Line-to-line voltages of the plant with phase A tied to the source.
pub fn measured_line_voltages(x: &StateVector, v_dc: f64) -> (f64, f64, f64) {
    (v_dc - x.v_bn, x.v_bn - x.v_cn, x.v_cn - v_dc)
}

fn rk4_step(model: &ContinuousModel, x: &StateVector, u: &InputVector, h: f64) -> StateVector {
    let x0 = x.to_vector();
    let f = |v: &nalgebra::Vector5<f64>| model.g * v + model.h * u.to_vector();
    let k1 = f(&x0);
    let k2 = f(&(x0 + k1 * (h / 2.0)));
    let k3 = f(&(x0 + k2 * (h / 2.0)));
    let k4 = f(&(x0 + k3 * h));
    StateVector::from_vector(&(x0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)))
}

/// Fixed-step RK4 integration of the continuous model over `span`.
pub fn integrate_rk4(model: &ContinuousModel, x: &StateVector, u: &InputVector, span: f64, substeps: usize) -> StateVector {
    let h = span / substeps as f64;
    (0..substeps).fold(*x, |acc, _| rk4_step(model, &acc, u, h))
}

/// Runs the controller against the plant for `sim.duration`.
pub fn run_closed_loop(sc: &Scenario) -> Result<Trace> {
    sc.validate()?;
    let schedule = sc.schedule()?;
    let t_s = sc.mpc.t_s;
    let bank = ModelBank::build(&sc.circuit, sc.variant, t_s)?;
    let continuous: Vec<ContinuousModel> = if sc.sim.plant_substeps > 1 {
        SwitchState::ALL
            .iter()
            .map(|&s| assemble_continuous(&sc.circuit, s, sc.variant))
            .collect()
    } else {
        Vec::new()
    };

    let n = sc.sim.steps(t_s);
    let v_dc = sc.circuit.v_dc;
    let mut records = Vec::with_capacity(n + 1);
    let mut x = sc.sim.initial_state;
    let mut prev = SwitchState::default();
    let mut refs = vec![(0.0, 0.0); sc.mpc.horizon];

    for k in 0..=n {
        let t = k as f64 * t_s;
        if !x.is_finite() {
            return Err(Error::numeric_at("plant state diverged", t));
        }
        let u = sc.inputs_at(t);
        for (j, r) in refs.iter_mut().enumerate() {
            let (_, bn, cn) = schedule.phase_references(t + (j + 1) as f64 * t_s);
            *r = (bn, cn);
        }
        let decision = mpc::select_switch_state(&x, &u, &refs, &bank, &sc.mpc, prev).map_err(|e| match e {
            Error::Numeric { message, at: None } => Error::numeric_at(message, t),
            other => other,
        })?;
        let (_, v_bn_ref, v_cn_ref) = schedule.phase_references(t);
        let (v_ab, v_bc, v_ca) = measured_line_voltages(&x, v_dc);
        records.push(TraceRecord {
            t,
            switch_state: decision.chosen,
            x,
            v_bn_ref,
            v_cn_ref,
            v_ab,
            v_bc,
            v_ca,
            cost: decision.cost.total,
        });
        if k < n {
            x = if sc.sim.plant_substeps > 1 {
                integrate_rk4(&continuous[decision.chosen.index()], &x, &u, t_s, sc.sim.plant_substeps)
            } else {
                bank.get(decision.chosen).step(&x, &u)
            };
        }
        prev = decision.chosen;
    }
    Ok(Trace {
        t_s,
        v_dc,
        schedule,
        records,
    })
}
