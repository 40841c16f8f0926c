//! Switching-state dependent state-space model of the three-switch inverter
//! and its exact zero-order-hold discretization.
//!
//! State order is `[v_bn, v_cn, i_lx, i_l1, i_l2]`, input order is
//! `[v_c1, v_c2, v_g]`. All quantities are SI.

use std::fmt;

use nalgebra::{DMatrix, Matrix5, Matrix5x3, Vector3, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm;

/// Passive component values, parasitics, load and supply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitParams {
    /// Input inductor (H).
    pub l_x: f64,
    /// Phase-B output inductor (H).
    pub l_1: f64,
    /// Phase-C output inductor (H).
    pub l_2: f64,
    /// Intermediate capacitors (F). Only used by the sizing report; their
    /// voltages enter the model as inputs.
    pub c_1: f64,
    pub c_2: f64,
    /// Phase-C output capacitor (F).
    pub c_3: f64,
    /// Phase-B output capacitor (F).
    pub c_4: f64,
    pub r_lx: f64,
    pub r_l1: f64,
    pub r_l2: f64,
    pub r_c3: f64,
    pub r_c4: f64,
    /// Per-phase load resistance (Ω).
    pub r_load: f64,
    /// DC source voltage (V).
    pub v_dc: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams {
            l_x: 3.6e-3,
            l_1: 1.2e-3,
            l_2: 1.2e-3,
            c_1: 30e-6,
            c_2: 30e-6,
            c_3: 1e-6,
            c_4: 1e-6,
            r_lx: 0.1,
            r_l1: 0.1,
            r_l2: 0.1,
            r_c3: 0.05,
            r_c4: 0.05,
            r_load: 50.0,
            v_dc: 100.0,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l_x", self.l_x),
            ("l_1", self.l_1),
            ("l_2", self.l_2),
            ("c_1", self.c_1),
            ("c_2", self.c_2),
            ("c_3", self.c_3),
            ("c_4", self.c_4),
            ("r_load", self.r_load),
            ("v_dc", self.v_dc),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("circuit.{name} must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("r_lx", self.r_lx),
            ("r_l1", self.r_l1),
            ("r_l2", self.r_l2),
            ("r_c3", self.r_c3),
            ("r_c4", self.r_c4),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("circuit.{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Gate commands of the three switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SwitchState {
    pub q_x: bool,
    pub q_1: bool,
    pub q_2: bool,
}

impl SwitchState {
    /// All eight states in index order.
    pub const ALL: [SwitchState; 8] = [
        SwitchState::from_index(0),
        SwitchState::from_index(1),
        SwitchState::from_index(2),
        SwitchState::from_index(3),
        SwitchState::from_index(4),
        SwitchState::from_index(5),
        SwitchState::from_index(6),
        SwitchState::from_index(7),
    ];

    pub const fn new(q_x: bool, q_1: bool, q_2: bool) -> Self {
        SwitchState { q_x, q_1, q_2 }
    }

    /// `4·q_x + 2·q_1 + q_2`.
    pub const fn index(self) -> usize {
        (self.q_x as usize) << 2 | (self.q_1 as usize) << 1 | self.q_2 as usize
    }

    /// Inverse of [`SwitchState::index`]; only the low three bits are read.
    pub const fn from_index(i: usize) -> Self {
        SwitchState {
            q_x: i & 4 != 0,
            q_1: i & 2 != 0,
            q_2: i & 1 != 0,
        }
    }

    pub fn bits(self) -> [u8; 3] {
        [self.q_x as u8, self.q_1 as u8, self.q_2 as u8]
    }

    /// True when the source drives `L_1` and charges the phase-B capacitor,
    /// i.e. `Q_x·(1 − Q_2) = 1`.
    pub fn drives_phase_b(self) -> bool {
        self.q_x && !self.q_2
    }

    /// `Q_x·(1 − Q_1) = 1`.
    pub fn drives_phase_c(self) -> bool {
        self.q_x && !self.q_1
    }
}

impl fmt::Display for SwitchState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, a, b] = self.bits();
        write!(f, "({x},{a},{b})")
    }
}

/// Plant state: node voltages against the supply common and inductor currents.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateVector {
    pub v_bn: f64,
    pub v_cn: f64,
    pub i_lx: f64,
    pub i_l1: f64,
    pub i_l2: f64,
}

impl StateVector {
    pub fn to_vector(self) -> Vector5<f64> {
        Vector5::new(self.v_bn, self.v_cn, self.i_lx, self.i_l1, self.i_l2)
    }

    pub fn from_vector(v: &Vector5<f64>) -> Self {
        StateVector {
            v_bn: v[0],
            v_cn: v[1],
            i_lx: v[2],
            i_l1: v[3],
            i_l2: v[4],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }

    /// `[i_lx, i_l1, i_l2]`, the order used by the saturation weights.
    pub fn inductor_currents(&self) -> [f64; 3] {
        [self.i_lx, self.i_l1, self.i_l2]
    }
}

/// Exogenous inputs: intermediate capacitor voltages and the source voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputVector {
    pub v_c1: f64,
    pub v_c2: f64,
    pub v_g: f64,
}

impl InputVector {
    /// Both intermediate capacitors sitting at the source voltage.
    pub fn nominal(v_dc: f64) -> Self {
        InputVector {
            v_c1: v_dc,
            v_c2: v_dc,
            v_g: v_dc,
        }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.v_c1, self.v_c2, self.v_g)
    }
}

/// How the state matrix `G` is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Reference matrix kept term for term, anomalies included. Row 1 has a positive
    /// diagonal, row 3 adds a bare `(1 − Q_x)` to a resistive rate, the
    /// current rows carry an extra `1/C` factor, and the `i_l2` row has no
    /// `v_cn` coupling. With non-zero parasitics this model is violently
    /// unstable and usually cannot be discretized.
    AsPrinted,
    /// Dissipative, dimensionally consistent variant whose capacitor
    /// charging follows the per-mode voltage directions of the topology.
    #[default]
    ModeConsistent,
}

/// Continuous-time model `ẋ = G·x + H·u` for one switching state.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel {
    pub g: Matrix5<f64>,
    pub h: Matrix5x3<f64>,
    pub switch_state: SwitchState,
}

impl ContinuousModel {
    /// `G·x + H·u`.
    pub fn derivative(&self, x: &StateVector, u: &InputVector) -> StateVector {
        StateVector::from_vector(&(self.g * x.to_vector() + self.h * u.to_vector()))
    }
}

fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Input matrix; identical for both variants.
fn input_matrix(p: &CircuitParams, s: SwitchState) -> Matrix5x3<f64> {
    let qx = bit(s.q_x);
    let drive_b = bit(s.drives_phase_b());
    let drive_c = bit(s.drives_phase_c());
    let mut h = Matrix5x3::zeros();
    h[(2, 2)] = qx / p.l_x;
    h[(3, 0)] = drive_b / p.l_1;
    h[(3, 2)] = drive_b / p.l_1;
    h[(4, 1)] = drive_c / p.l_2;
    h[(4, 2)] = drive_c / p.l_2;
    h
}

fn state_matrix_as_printed(p: &CircuitParams, s: SwitchState) -> Matrix5<f64> {
    let (qx, q1, q2) = (bit(s.q_x), bit(s.q_1), bit(s.q_2));
    let r = p.r_load;
    let den4 = p.c_4 * (p.r_c4 + r);
    let den3 = p.c_3 * (p.r_c3 + r);
    let mut g = Matrix5::zeros();
    g[(0, 0)] = 1.0 / den4;
    g[(0, 3)] = r / den4 * (1.0 - 2.0 * q2);
    g[(1, 1)] = -1.0 / den3;
    g[(1, 4)] = r / den3 * (1.0 - 2.0 * q1);
    g[(2, 2)] = -p.r_lx * qx / p.l_x + (1.0 - qx);
    g[(3, 0)] = -r / (p.l_1 * (p.r_c4 + r));
    g[(3, 3)] = (p.r_c4 * r * (2.0 * q2 - 1.0)
        + (p.r_l1 * p.r_c4 + p.r_l1 * r) * (1.0 + 2.0 * qx * q2 - 2.0 * qx - 2.0 * q2))
        / (p.l_1 * p.c_4 * (p.r_c4 + r));
    // The reference row names a third switch "Q_3" in the product term; the
    // topology has no such switch, so it is read as Q_x by symmetry with
    // the i_l1 row.
    g[(4, 4)] = ((p.r_l2 * p.r_c3 + p.r_l2 * r) * (1.0 + 2.0 * qx * q1 - 2.0 * qx - 2.0 * q1)
        + p.r_c3 * r * (2.0 * q1 - 1.0))
        / (p.l_2 * p.c_3 * (p.r_c3 + r));
    g
}

fn state_matrix_mode_consistent(p: &CircuitParams, s: SwitchState) -> Matrix5<f64> {
    let r = p.r_load;
    let drive_b = bit(s.drives_phase_b());
    let drive_c = bit(s.drives_phase_c());
    let mut g = Matrix5::zeros();

    // Output capacitor with ESR feeding the load; the inductor current only
    // reaches the capacitor while the source drives that phase.
    let den4 = p.c_4 * (p.r_c4 + r);
    g[(0, 0)] = -1.0 / den4;
    g[(0, 3)] = r / den4 * drive_b;
    let den3 = p.c_3 * (p.r_c3 + r);
    g[(1, 1)] = -1.0 / den3;
    g[(1, 4)] = r / den3 * drive_c;

    g[(2, 2)] = -(p.r_lx + r) / p.l_x;

    // Output inductors see the loaded node voltage and their series losses.
    let par4 = p.r_c4 * r / (p.r_c4 + r);
    g[(3, 0)] = -r / (p.l_1 * (p.r_c4 + r));
    g[(3, 3)] = -(p.r_l1 + par4) / p.l_1;
    let par3 = p.r_c3 * r / (p.r_c3 + r);
    g[(4, 1)] = -r / (p.l_2 * (p.r_c3 + r));
    g[(4, 4)] = -(p.r_l2 + par3) / p.l_2;
    g
}

/// Continuous model for switching state `s`.
pub fn assemble_continuous(params: &CircuitParams, s: SwitchState, variant: ModelVariant) -> ContinuousModel {
    let g = match variant {
        ModelVariant::AsPrinted => state_matrix_as_printed(params, s),
        ModelVariant::ModeConsistent => state_matrix_mode_consistent(params, s),
    };
    ContinuousModel {
        g,
        h: input_matrix(params, s),
        switch_state: s,
    }
}

/// `x(k+1) = Φ·x(k) + Γ·u(k)` for one switching state held over `t_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    pub phi: Matrix5<f64>,
    pub gamma: Matrix5x3<f64>,
    pub t_s: f64,
    pub switch_state: SwitchState,
}

impl DiscreteModel {
    /// `Φ·x + Γ·u`.
    pub fn step(&self, x: &StateVector, u: &InputVector) -> StateVector {
        StateVector::from_vector(&(self.phi * x.to_vector() + self.gamma * u.to_vector()))
    }

    /// Row-major copy of `Φ` (25 values).
    pub fn phi_row_major(&self) -> Vec<f64> {
        self.phi.transpose().as_slice().to_vec()
    }

    /// Row-major copy of `Γ` (15 values).
    pub fn gamma_row_major(&self) -> Vec<f64> {
        self.gamma.transpose().as_slice().to_vec()
    }
}

/// Exact ZOH discretization.
///
/// `Φ` and `Γ` are read from `exp([[G, H], [0, 0]]·t_s)`, which equals
/// `[[Φ, ∫₀^t_s e^{Gτ}dτ·H], [0, I]]`. No inverse of `G` is formed, so
/// singular state matrices are handled.
pub fn zoh_discretize(model: &ContinuousModel, t_s: f64) -> Result<DiscreteModel> {
    if !(t_s.is_finite() && t_s > 0.0) {
        return Err(Error::config(format!("sample time must be > 0, got {t_s}")));
    }
    let mut aug = DMatrix::<f64>::zeros(8, 8);
    for i in 0..5 {
        for j in 0..5 {
            aug[(i, j)] = model.g[(i, j)] * t_s;
        }
        for j in 0..3 {
            aug[(i, 5 + j)] = model.h[(i, j)] * t_s;
        }
    }
    let e = expm::expm(&aug).map_err(|err| match err {
        Error::Numeric { message, .. } => Error::numeric(format!(
            "discretizing state {}: {message}",
            model.switch_state
        )),
        other => other,
    })?;
    let phi = Matrix5::from_fn(|i, j| e[(i, j)]);
    let gamma = Matrix5x3::from_fn(|i, j| e[(i, 5 + j)]);
    Ok(DiscreteModel {
        phi,
        gamma,
        t_s,
        switch_state: model.switch_state,
    })
}

/// Discrete models for all eight switching states at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBank {
    models: Vec<DiscreteModel>,
    t_s: f64,
    variant: ModelVariant,
}

impl ModelBank {
    pub fn build(params: &CircuitParams, variant: ModelVariant, t_s: f64) -> Result<Self> {
        params.validate()?;
        let models = SwitchState::ALL
            .iter()
            .map(|&s| zoh_discretize(&assemble_continuous(params, s, variant), t_s))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelBank { models, t_s, variant })
    }

    /// Bank assembled from arbitrary models; entry `i` must be for state `i`.
    pub fn from_models(models: Vec<DiscreteModel>, variant: ModelVariant) -> Result<Self> {
        if models.len() != 8 {
            return Err(Error::config(format!("model bank needs 8 entries, got {}", models.len())));
        }
        for (i, m) in models.iter().enumerate() {
            if m.switch_state.index() != i {
                return Err(Error::config(format!(
                    "model bank entry {i} holds state {}",
                    m.switch_state
                )));
            }
        }
        let t_s = models[0].t_s;
        Ok(ModelBank { models, t_s, variant })
    }

    pub fn get(&self, s: SwitchState) -> &DiscreteModel {
        &self.models[s.index()]
    }

    pub fn models(&self) -> &[DiscreteModel] {
        &self.models
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }
}

/// Qualitative direction of a derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Expected direction of `(dv_bn/dt, dv_cn/dt)` in each switching mode:
/// a node voltage rises exactly when the source drives that phase.
pub fn mode_sign_expectations(s: SwitchState) -> (Sign, Sign) {
    let dir = |up: bool| if up { Sign::Positive } else { Sign::Negative };
    (dir(s.drives_phase_b()), dir(s.drives_phase_c()))
}

/// One row of the mode-direction diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSignRow {
    pub state: SwitchState,
    pub expected: (Sign, Sign),
    pub observed: (Sign, Sign),
}

impl ModeSignRow {
    pub fn consistent(&self) -> bool {
        self.expected == self.observed
    }
}

/// Operating point for the mode diagnostic: node voltages at `v_dc`, inputs
/// nominal, and inductor currents at the averaged steady-state value of the
/// mode-consistent cell (`(v_c1 + v_g)/r_load` for the output inductors,
/// `v_dc/(r_lx + r_load)` for the input inductor).
pub fn nominal_operating_point(params: &CircuitParams) -> (StateVector, InputVector) {
    let u = InputVector::nominal(params.v_dc);
    let i_out = (u.v_c1 + u.v_g) / params.r_load;
    let x = StateVector {
        v_bn: params.v_dc,
        v_cn: params.v_dc,
        i_lx: params.v_dc / (params.r_lx + params.r_load),
        i_l1: i_out,
        i_l2: i_out,
    };
    (x, u)
}

/// Evaluates the node-voltage derivative signs of every mode at `(x, u)`.
pub fn mode_sign_check(
    params: &CircuitParams,
    variant: ModelVariant,
    x: &StateVector,
    u: &InputVector,
) -> Vec<ModeSignRow> {
    SwitchState::ALL
        .iter()
        .map(|&s| {
            let d = assemble_continuous(params, s, variant).derivative(x, u);
            ModeSignRow {
                state: s,
                expected: mode_sign_expectations(s),
                observed: (Sign::of(d.v_bn), Sign::of(d.v_cn)),
            }
        })
        .collect()
}
