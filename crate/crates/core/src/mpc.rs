//! Finite-control-set model predictive control.
//!
//! Every decision measures the plant at `k`, predicts each candidate
//! switching state over `k+1..k+n_p`, scores the predictions against the
//! reference lookahead and applies the cheapest state for the next sample.
//! With the simplified scheme one candidate is held across the whole
//! horizon, so a decision costs 8 trajectory evaluations for any `n_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{DiscreteModel, InputVector, ModelBank, StateVector, SwitchState};

/// Horizon cap for exhaustive `8^n_p` enumeration.
pub const MAX_FULL_ENUMERATION_HORIZON: usize = 3;

/// Relative tolerance under which two candidate costs are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionScheme {
    /// Hold each candidate for the whole horizon (8 evaluations).
    #[default]
    Simplified,
    /// Every sequence of states over the horizon (`8^n_p` evaluations).
    FullEnumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Keep the previous state when it ties with the minimum.
    #[default]
    PreferPrevious,
    LowestIndex,
}

/// Controller settings. Per-inductor arrays are ordered `[x, 1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcConfig {
    pub horizon: usize,
    pub lambda: [f64; 3],
    pub beta: [f64; 3],
    pub i_sat: [f64; 3],
    pub t_s: f64,
    pub scheme: PredictionScheme,
    pub tie_break: TieBreak,
    /// Penalize predicted inductor currents instead of the measured ones.
    pub saturation_on_predicted: bool,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            horizon: 2,
            lambda: [0.10; 3],
            beta: [0.5; 3],
            i_sat: [17.7, 14.7, 14.7],
            t_s: 25e-6,
            scheme: PredictionScheme::Simplified,
            tie_break: TieBreak::PreferPrevious,
            saturation_on_predicted: false,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("mpc.n_p must be >= 1"));
        }
        if self.scheme == PredictionScheme::FullEnumeration && self.horizon > MAX_FULL_ENUMERATION_HORIZON {
            return Err(Error::config(format!(
                "full enumeration is limited to n_p <= {MAX_FULL_ENUMERATION_HORIZON}, got {}",
                self.horizon
            )));
        }
        if !(self.t_s.is_finite() && self.t_s > 0.0) {
            return Err(Error::config(format!("mpc.t_s must be > 0, got {}", self.t_s)));
        }
        for p in 0..3 {
            if !(self.lambda[p].is_finite() && self.lambda[p] >= 0.0) {
                return Err(Error::config(format!("mpc.lambda[{p}] must be >= 0, got {}", self.lambda[p])));
            }
            if !(self.beta[p] > 0.0 && self.beta[p] <= 1.0) {
                return Err(Error::config(format!("mpc.beta[{p}] must be in (0, 1], got {}", self.beta[p])));
            }
            if !(self.i_sat[p].is_finite() && self.i_sat[p] > 0.0) {
                return Err(Error::config(format!("mpc.i_sat[{p}] must be > 0, got {}", self.i_sat[p])));
            }
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = [lambda; 3];
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub tracking: f64,
    pub saturation: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlDecision {
    pub chosen: SwitchState,
    pub cost: CostBreakdown,
    /// Total cost of each candidate first move, in state-index order.
    pub candidate_costs: [f64; 8],
    /// Number of horizon trajectories scored.
    pub evaluations: usize,
}

pub fn predict_step(model: &DiscreteModel, x: &StateVector, u: &InputVector) -> StateVector {
    model.step(x, u)
}

/// States at `k+1..=k+steps` with `s` and `u` held constant.
pub fn predict_horizon(
    bank: &ModelBank,
    x: &StateVector,
    u: &InputVector,
    s: SwitchState,
    steps: usize,
) -> Vec<StateVector> {
    let model = bank.get(s);
    let mut out = Vec::with_capacity(steps);
    let mut cur = *x;
    for _ in 0..steps {
        cur = model.step(&cur, u);
        out.push(cur);
    }
    out
}

/// Tracking error summed over the horizon plus the inductor saturation
/// penalty. `refs[j]` is `(v_bn_ref, v_cn_ref)` at `k+1+j`.
pub fn evaluate_cost(
    predicted: &[StateVector],
    refs: &[(f64, f64)],
    i_now: [f64; 3],
    cfg: &MpcConfig,
) -> Result<CostBreakdown> {
    if predicted.len() != refs.len() || refs.len() != cfg.horizon {
        return Err(Error::config(format!(
            "cost needs {} predictions and references, got {} and {}",
            cfg.horizon,
            predicted.len(),
            refs.len()
        )));
    }
    let tracking = predicted
        .iter()
        .zip(refs)
        .map(|(x, &(rb, rc))| (x.v_bn - rb).powi(2) + (x.v_cn - rc).powi(2))
        .sum();
    let penalty = |i: [f64; 3]| -> f64 {
        (0..3)
            .map(|p| cfg.lambda[p] * (i[p] - cfg.beta[p] * cfg.i_sat[p]).powi(2))
            .sum::<f64>()
    };
    let saturation = if cfg.saturation_on_predicted {
        predicted.iter().map(|x| penalty(x.inductor_currents())).sum()
    } else {
        penalty(i_now)
    };
    Ok(CostBreakdown {
        tracking,
        saturation,
        total: tracking + saturation,
    })
}

/// Index of the minimum under the tie policy.
pub fn pick_minimum(costs: &[f64; 8], prev: SwitchState, tie_break: TieBreak) -> usize {
    let c_min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * c_min.max(1.0);
    let ties = |i: usize| costs[i] - c_min <= tol;
    if tie_break == TieBreak::PreferPrevious && ties(prev.index()) {
        return prev.index();
    }
    (0..8)
        .find(|&i| ties(i))
        .unwrap_or(prev.index())
}

/// Chooses the switching state to apply over the next sample.
pub fn select_switch_state(
    x: &StateVector,
    u: &InputVector,
    refs: &[(f64, f64)],
    bank: &ModelBank,
    cfg: &MpcConfig,
    prev: SwitchState,
) -> Result<ControlDecision> {
    if refs.len() != cfg.horizon {
        return Err(Error::config(format!(
            "expected {} references, got {}",
            cfg.horizon,
            refs.len()
        )));
    }
    let i_now = x.inductor_currents();
    let mut costs = [0.0; 8];
    let mut breakdowns = [CostBreakdown::default(); 8];
    let evaluations = match cfg.scheme {
        PredictionScheme::Simplified => {
            for s in SwitchState::ALL {
                let traj = predict_horizon(bank, x, u, s, cfg.horizon);
                let c = evaluate_cost(&traj, refs, i_now, cfg)?;
                costs[s.index()] = c.total;
                breakdowns[s.index()] = c;
            }
            8
        }
        PredictionScheme::FullEnumeration => {
            let n = 8usize.pow(cfg.horizon as u32);
            let mut best = [None::<CostBreakdown>; 8];
            let mut traj = Vec::with_capacity(cfg.horizon);
            for code in 0..n {
                traj.clear();
                let mut cur = *x;
                let mut rest = code;
                let mut first = 0;
                for j in 0..cfg.horizon {
                    let idx = rest % 8;
                    rest /= 8;
                    if j == 0 {
                        first = idx;
                    }
                    cur = bank.models()[idx].step(&cur, u);
                    traj.push(cur);
                }
                let c = evaluate_cost(&traj, refs, i_now, cfg)?;
                match best[first] {
                    Some(b) if b.total <= c.total => {}
                    _ => best[first] = Some(c),
                }
            }
            for i in 0..8 {
                let b = best[i].expect("every first move is enumerated");
                costs[i] = b.total;
                breakdowns[i] = b;
            }
            n
        }
    };
    if !costs.iter().any(|c| c.is_finite()) {
        return Err(Error::numeric("no candidate has a finite cost"));
    }
    let chosen = pick_minimum(&costs, prev, cfg.tie_break);
    Ok(ControlDecision {
        chosen: SwitchState::from_index(chosen),
        cost: breakdowns[chosen],
        candidate_costs: costs,
        evaluations,
    })
}

/// Linear current-transducer map `I = 5.33·V − 13.33`.
pub fn current_from_transducer(v_il: f64) -> f64 {
    5.33 * v_il - 13.33
}

pub fn transducer_voltage(i_l: f64) -> f64 {
    (i_l + 13.33) / 5.33
}
