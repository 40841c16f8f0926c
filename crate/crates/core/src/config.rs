//! TOML run configuration. Every section and key is optional; missing values
//! take the reference operating point. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::design::{DesignInputs, RippleTargets};
use crate::error::{Error, Result};
use crate::metrics::{DEFAULT_MAX_HARMONIC, DEFAULT_SETTLE_BAND};
use crate::mpc::{MpcConfig, PredictionScheme, TieBreak};
use crate::plant::{CircuitParams, ModelVariant, StateVector};
use crate::sim::{CapRipple, Scenario, SimConfig};
use crate::waveforms::{ReferenceConfig, StepEvent};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    model_variant: Option<ModelVariant>,
    #[serde(default)]
    circuit: CircuitParams,
    #[serde(default)]
    reference: ReferenceSection,
    #[serde(default)]
    mpc: MpcSection,
    #[serde(default)]
    sim: SimSection,
    #[serde(default)]
    design: DesignSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    v_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    freq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_load: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i_m: Option<f64>,
    /// Must equal `circuit.v_dc` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    v_dc: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpcSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i_sat_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i_sat_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i_sat_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<PredictionScheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tie_break: Option<TieBreak>,
    #[serde(skip_serializing_if = "Option::is_none")]
    saturation_on_predicted: Option<bool>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warmup_cycles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plant_substeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_harmonic: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    settle_band: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_state: Option<StateVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    events: Vec<StepEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap_ripple: Option<CapRipple>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    i_in_max: Option<f64>,
    #[serde(default)]
    ripple: RippleTargets,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
}

/// Validated configuration for every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub max_harmonic: usize,
    /// Settle band around the reference (V).
    pub settle_band: f64,
    /// Input-current bound for sizing the input inductor; defaults to `i_m`.
    pub i_in_max: f64,
    pub ripple: RippleTargets,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_toml_str("").expect("built-in defaults are valid")
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::config(e.message().to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn from_file(file: ConfigFile) -> Result<Self> {
        let circuit = file.circuit;
        let r = file.reference;
        if let Some(v_dc) = r.v_dc {
            if v_dc != circuit.v_dc {
                return Err(Error::config(format!(
                    "reference.v_dc ({v_dc}) must equal circuit.v_dc ({})",
                    circuit.v_dc
                )));
            }
        }
        let v_m = r.v_m.unwrap_or(100.0);
        let reference = ReferenceConfig {
            v_m,
            v_dc: circuit.v_dc,
            freq: r.freq.unwrap_or(50.0),
            phi_load: r.phi_load.unwrap_or(0.0),
            i_m: r.i_m.unwrap_or(v_m / circuit.r_load),
        };

        let m = file.mpc;
        let defaults = MpcConfig::default();
        let shared_lambda = m.lambda.unwrap_or(defaults.lambda[0]);
        let beta = m.beta.unwrap_or(defaults.beta[0]);
        let mpc = MpcConfig {
            horizon: m.n_p.unwrap_or(defaults.horizon),
            lambda: [
                m.lambda_x.unwrap_or(shared_lambda),
                m.lambda_1.unwrap_or(shared_lambda),
                m.lambda_2.unwrap_or(shared_lambda),
            ],
            beta: [beta; 3],
            i_sat: [
                m.i_sat_x.unwrap_or(defaults.i_sat[0]),
                m.i_sat_1.unwrap_or(defaults.i_sat[1]),
                m.i_sat_2.unwrap_or(defaults.i_sat[2]),
            ],
            t_s: m.t_s.unwrap_or(defaults.t_s),
            scheme: m.scheme.unwrap_or(defaults.scheme),
            tie_break: m.tie_break.unwrap_or(defaults.tie_break),
            saturation_on_predicted: m.saturation_on_predicted.unwrap_or(defaults.saturation_on_predicted),
        };

        let s = file.sim;
        let sim_defaults = SimConfig::default();
        let sim = SimConfig {
            duration: s.duration.unwrap_or(sim_defaults.duration),
            warmup_cycles: s.warmup_cycles.unwrap_or(sim_defaults.warmup_cycles),
            plant_substeps: s.plant_substeps.unwrap_or(sim_defaults.plant_substeps),
            initial_state: s.initial_state.unwrap_or(sim_defaults.initial_state),
            events: s.events,
            cap_ripple: s.cap_ripple,
        };

        let scenario = Scenario {
            circuit,
            variant: file.model_variant.unwrap_or_default(),
            mpc,
            reference,
            sim,
        };
        scenario.validate()?;

        let max_harmonic = s.max_harmonic.unwrap_or(DEFAULT_MAX_HARMONIC);
        if max_harmonic < 2 {
            return Err(Error::config("sim.max_harmonic must be >= 2"));
        }
        let settle_band = s.settle_band.unwrap_or(DEFAULT_SETTLE_BAND);
        if !(settle_band.is_finite() && settle_band > 0.0) {
            return Err(Error::config(format!("sim.settle_band must be > 0, got {settle_band}")));
        }
        let i_in_max = file.design.i_in_max.unwrap_or(reference.i_m);
        if !(i_in_max.is_finite() && i_in_max > 0.0) {
            return Err(Error::config(format!("design.i_in_max must be > 0, got {i_in_max}")));
        }
        file.design.ripple.validate()?;

        Ok(RunConfig {
            scenario,
            max_harmonic,
            settle_band,
            i_in_max,
            ripple: file.design.ripple,
            output_dir: file.output.dir,
        })
    }

    pub fn design_inputs(&self) -> DesignInputs {
        let sc = &self.scenario;
        DesignInputs {
            v_dc: sc.circuit.v_dc,
            v_m: sc.reference.v_m,
            i_m: sc.reference.i_m,
            i_in_max: self.i_in_max,
            t_s: sc.mpc.t_s,
            phi_load: sc.reference.phi_load,
        }
    }

    /// Fully explicit TOML that parses back to an equal configuration.
    /// Per-phase `beta` values collapse to the first one.
    pub fn to_toml_string(&self) -> Result<String> {
        let sc = &self.scenario;
        let m = &sc.mpc;
        let file = ConfigFile {
            model_variant: Some(sc.variant),
            circuit: sc.circuit,
            reference: ReferenceSection {
                v_m: Some(sc.reference.v_m),
                freq: Some(sc.reference.freq),
                phi_load: Some(sc.reference.phi_load),
                i_m: Some(sc.reference.i_m),
                v_dc: None,
            },
            mpc: MpcSection {
                n_p: Some(m.horizon),
                lambda: None,
                lambda_x: Some(m.lambda[0]),
                lambda_1: Some(m.lambda[1]),
                lambda_2: Some(m.lambda[2]),
                beta: Some(m.beta[0]),
                i_sat_x: Some(m.i_sat[0]),
                i_sat_1: Some(m.i_sat[1]),
                i_sat_2: Some(m.i_sat[2]),
                t_s: Some(m.t_s),
                scheme: Some(m.scheme),
                tie_break: Some(m.tie_break),
                saturation_on_predicted: Some(m.saturation_on_predicted),
            },
            sim: SimSection {
                duration: Some(sc.sim.duration),
                warmup_cycles: Some(sc.sim.warmup_cycles),
                plant_substeps: Some(sc.sim.plant_substeps),
                max_harmonic: Some(self.max_harmonic),
                settle_band: Some(self.settle_band),
                initial_state: Some(sc.sim.initial_state),
                events: sc.sim.events.clone(),
                cap_ripple: sc.sim.cap_ripple,
            },
            design: DesignSection {
                i_in_max: Some(self.i_in_max),
                ripple: self.ripple,
            },
            output: OutputSection {
                dir: self.output_dir.clone(),
            },
        };
        toml::to_string(&file).map_err(|e| Error::config(format!("cannot serialize configuration: {e}")))
    }
}
