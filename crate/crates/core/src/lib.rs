//! Model, controller, simulation and design tooling for a three-switch,
//! three-phase DC-AC inverter driven by finite-control-set model predictive
//! control.

pub mod config;
pub mod design;
pub mod error;
pub mod expm;
pub mod metrics;
pub mod mpc;
pub mod output;
pub mod plant;
pub mod sim;
pub mod sweep;
pub mod waveforms;

// matrix types appear in the public model API
pub use nalgebra;

pub use config::RunConfig;
pub use design::{comparison_report, max_duty, size_components, DesignInputs, DesignReport, RippleTargets, TopologyRow};
pub use error::{Error, Result};
pub use metrics::{compute_metrics, thd, MetricsReport};
pub use mpc::{select_switch_state, ControlDecision, MpcConfig, PredictionScheme, TieBreak};
pub use plant::{CircuitParams, DiscreteModel, InputVector, ModelBank, ModelVariant, StateVector, SwitchState};
pub use sim::{run_closed_loop, Scenario, SimConfig, Trace, TraceRecord};
pub use sweep::{sweep, SweepCell, SweepRow};
pub use waveforms::{ReferenceConfig, StepEvent};
