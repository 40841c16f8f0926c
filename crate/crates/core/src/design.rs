//! Component sizing from duty-cycle and ripple budgets, and the scalar
//! comparison against six-switch and four-switch inverters.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `f_sw,min / f_sw,max`.
pub const MIN_SWITCHING_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignInputs {
    pub v_dc: f64,
    pub v_m: f64,
    /// Peak phase current (A).
    pub i_m: f64,
    /// Maximum input current (A).
    pub i_in_max: f64,
    pub t_s: f64,
    /// Load angle (rad), within `[0, π/2]`.
    pub phi_load: f64,
}

impl DesignInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("v_dc", self.v_dc),
            ("v_m", self.v_m),
            ("i_m", self.i_m),
            ("i_in_max", self.i_in_max),
            ("t_s", self.t_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("design input {name} must be > 0, got {v}")));
            }
        }
        if !(0.0..=FRAC_PI_2).contains(&self.phi_load) {
            return Err(Error::config(format!(
                "design load angle must be within [0, pi/2], got {}",
                self.phi_load
            )));
        }
        if self.v_m > self.v_dc {
            return Err(Error::Constraint(format!(
                "peak line voltage must satisfy 0 <= v_m <= v_dc (v_m = {}, v_dc = {})",
                self.v_m, self.v_dc
            )));
        }
        Ok(())
    }
}

/// Allowed ripple, each as a fraction of its reference quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RippleTargets {
    /// Intermediate-capacitor voltage ripple, fraction of `v_dc`.
    pub coupling_cap_voltage: f64,
    /// Output-inductor current ripple, fraction of `i_m`.
    pub output_inductor_current: f64,
    /// Output-capacitor voltage ripple, fraction of `v_dc + v_m`.
    pub output_cap_voltage: f64,
    /// Input-inductor current ripple, fraction of `i_in_max`.
    pub input_inductor_current: f64,
}

impl Default for RippleTargets {
    fn default() -> Self {
        RippleTargets {
            coupling_cap_voltage: 0.05,
            output_inductor_current: 0.3,
            output_cap_voltage: 0.1,
            input_inductor_current: 0.1,
        }
    }
}

impl RippleTargets {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coupling_cap_voltage", self.coupling_cap_voltage),
            ("output_inductor_current", self.output_inductor_current),
            ("output_cap_voltage", self.output_cap_voltage),
            ("input_inductor_current", self.input_inductor_current),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("ripple target {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    B,
    C,
}

/// `D(t) = V_out / (V_in + V_out)` with `V_in = v_dc` and `V_out` the phase
/// reference.
pub fn instantaneous_duty(t: f64, phase: Phase, inputs: &DesignInputs, freq: f64) -> f64 {
    let wt = TAU * freq * t;
    let angle = match phase {
        Phase::B => wt,
        Phase::C => wt - FRAC_PI_3,
    };
    let v_out = inputs.v_dc + inputs.v_m * angle.sin();
    v_out / (inputs.v_dc + v_out)
}

/// Design duty ratios `(d_max_b, d_max_c)`. Phase C is evaluated at the
/// peak of its load current with a resistive load, where the reference
/// sine is `sin(2π/3) ≈ 0.866`.
pub fn max_duty(inputs: &DesignInputs) -> (f64, f64) {
    let (v_dc, v_m) = (inputs.v_dc, inputs.v_m);
    let d_b = (v_dc + v_m) / (2.0 * v_dc + v_m);
    let d_c = (v_dc + 0.866 * v_m) / (2.0 * v_dc + 0.866 * v_m);
    (d_b, d_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignReport {
    pub d_max_b: f64,
    pub d_max_c: f64,
    pub f_sw_max: f64,
    pub f_sw_min: f64,
    /// Sized with `d_max_c`.
    pub c_coup_1: f64,
    /// Sized with `d_max_b`.
    pub c_coup_2: f64,
    pub c_out_3: f64,
    pub c_out_4: f64,
    /// Phase-B output inductor, sized with `d_max_b`.
    pub l_1: f64,
    /// Phase-C output inductor, sized with `d_max_c`.
    pub l_2: f64,
    /// Input inductor, sized with the larger duty ratio.
    pub l_x: f64,
    pub ripple: RippleTargets,
}

pub fn size_components(inputs: &DesignInputs, ripple: &RippleTargets) -> Result<DesignReport> {
    inputs.validate()?;
    ripple.validate()?;
    let (d_b, d_c) = max_duty(inputs);
    let f_max = 1.0 / (2.0 * inputs.t_s);
    let f_min = MIN_SWITCHING_FRACTION * f_max;
    let DesignInputs {
        v_dc, v_m, i_m, i_in_max, ..
    } = *inputs;

    let c_coup = |d: f64| d * i_m / (ripple.coupling_cap_voltage * v_dc * f_min);
    let c_out = ripple.output_inductor_current * i_m / (8.0 * ripple.output_cap_voltage * (v_dc + v_m) * f_min);
    let l_out = |d: f64| v_dc * d / (ripple.output_inductor_current * i_m * f_min);
    let l_x = v_dc * d_b.max(d_c) / (ripple.input_inductor_current * i_in_max * f_min);

    Ok(DesignReport {
        d_max_b: d_b,
        d_max_c: d_c,
        f_sw_max: f_max,
        f_sw_min: f_min,
        c_coup_1: c_coup(d_c),
        c_coup_2: c_coup(d_b),
        c_out_3: c_out,
        c_out_4: c_out,
        l_1: l_out(d_b),
        l_2: l_out(d_c),
        l_x,
        ripple: *ripple,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyRow {
    pub topology: &'static str,
    pub switches: u32,
    /// Total voltage rating of the switches (V).
    pub tvrs: f64,
    /// DC-utilization gain of the three-switch inverter over this topology.
    pub utilization_gain: f64,
}

pub fn comparison_report(v_m: f64) -> Result<Vec<TopologyRow>> {
    if !(v_m.is_finite() && v_m > 0.0) {
        return Err(Error::config(format!("v_m must be > 0, got {v_m}")));
    }
    let sqrt3 = 3f64.sqrt();
    Ok(vec![
        TopologyRow {
            topology: "six-switch",
            switches: 6,
            tvrs: 12.0 / sqrt3 * v_m,
            utilization_gain: 2.0 / sqrt3,
        },
        TopologyRow {
            topology: "four-switch",
            switches: 4,
            tvrs: 8.0 * v_m,
            utilization_gain: 2.0,
        },
        TopologyRow {
            topology: "three-switch",
            switches: 3,
            tvrs: 7.0 * v_m,
            utilization_gain: 1.0,
        },
    ])
}
