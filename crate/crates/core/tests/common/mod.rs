//! Independent reference implementations used by the integration tests.
//! Nothing here calls the routines it is meant to check.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trisw_core::mpc::{MpcConfig, PredictionScheme, TieBreak};
use trisw_core::plant::{ContinuousModel, DiscreteModel, InputVector, ModelBank, StateVector};

pub type Vec5 = [f64; 5];

pub fn state_array(x: &StateVector) -> Vec5 {
    [x.v_bn, x.v_cn, x.i_lx, x.i_l1, x.i_l2]
}

pub fn input_array(u: &InputVector) -> [f64; 3] {
    [u.v_c1, u.v_c2, u.v_g]
}

fn continuous_rate(m: &ContinuousModel, x: &Vec5, u: &[f64; 3]) -> Vec5 {
    let mut d = [0.0; 5];
    for (i, di) in d.iter_mut().enumerate() {
        *di = (0..5).map(|j| m.g[(i, j)] * x[j]).sum::<f64>() + (0..3).map(|j| m.h[(i, j)] * u[j]).sum::<f64>();
    }
    d
}

fn axpy(x: &Vec5, k: &Vec5, h: f64) -> Vec5 {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// Classical fixed-step fourth-order Runge-Kutta on plain arrays.
pub fn rk4(m: &ContinuousModel, x0: Vec5, u: [f64; 3], span: f64, steps: usize) -> Vec5 {
    let h = span / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        let k1 = continuous_rate(m, &x, &u);
        let k2 = continuous_rate(m, &axpy(&x, &k1, h / 2.0), &u);
        let k3 = continuous_rate(m, &axpy(&x, &k2, h / 2.0), &u);
        let k4 = continuous_rate(m, &axpy(&x, &k3, h), &u);
        x = std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    x
}

fn discrete_step(m: &DiscreteModel, x: &Vec5, u: &[f64; 3]) -> Vec5 {
    let phi = m.phi_row_major();
    let gamma = m.gamma_row_major();
    std::array::from_fn(|i| {
        (0..5).map(|j| phi[5 * i + j] * x[j]).sum::<f64>() + (0..3).map(|j| gamma[3 * i + j] * u[j]).sum::<f64>()
    })
}

fn sequence_cost(
    bank: &ModelBank,
    seq: &[usize],
    x: &Vec5,
    u: &[f64; 3],
    refs: &[(f64, f64)],
    cfg: &MpcConfig,
) -> f64 {
    let mut cur = *x;
    let mut cost = 0.0;
    let mut sat_pred = 0.0;
    for (j, &s) in seq.iter().enumerate() {
        cur = discrete_step(&bank.models()[s], &cur, u);
        cost += (cur[0] - refs[j].0).powi(2) + (cur[1] - refs[j].1).powi(2);
        for p in 0..3 {
            sat_pred += cfg.lambda[p] * (cur[2 + p] - cfg.beta[p] * cfg.i_sat[p]).powi(2);
        }
    }
    if cfg.saturation_on_predicted {
        cost + sat_pred
    } else {
        let mut sat = 0.0;
        for p in 0..3 {
            sat += cfg.lambda[p] * (x[2 + p] - cfg.beta[p] * cfg.i_sat[p]).powi(2);
        }
        cost + sat
    }
}

/// Exhaustive argmin with the documented tie rule: costs within
/// `1e-12·max(1, min)` of the minimum tie; the previous state wins a tie
/// under `PreferPrevious`, otherwise the lowest index does.
pub fn brute_force_select(
    bank: &ModelBank,
    x: &StateVector,
    u: &InputVector,
    refs: &[(f64, f64)],
    cfg: &MpcConfig,
    prev: usize,
) -> usize {
    let xa = state_array(x);
    let ua = input_array(u);
    let n = cfg.horizon;
    let mut per_first = [f64::INFINITY; 8];
    match cfg.scheme {
        PredictionScheme::Simplified => {
            for (s, c) in per_first.iter_mut().enumerate() {
                *c = sequence_cost(bank, &vec![s; n], &xa, &ua, refs, cfg);
            }
        }
        PredictionScheme::FullEnumeration => {
            fn visit(seq: &mut Vec<usize>, n: usize, f: &mut dyn FnMut(&[usize])) {
                if seq.len() == n {
                    f(seq);
                    return;
                }
                for s in 0..8 {
                    seq.push(s);
                    visit(seq, n, f);
                    seq.pop();
                }
            }
            visit(&mut Vec::new(), n, &mut |seq| {
                let c = sequence_cost(bank, seq, &xa, &ua, refs, cfg);
                if c < per_first[seq[0]] {
                    per_first[seq[0]] = c;
                }
            });
        }
    }
    let mut best = f64::INFINITY;
    for &c in &per_first {
        if c < best {
            best = c;
        }
    }
    let tol = 1e-12 * if best > 1.0 { best } else { 1.0 };
    if cfg.tie_break == TieBreak::PreferPrevious && per_first[prev] - best <= tol {
        return prev;
    }
    let mut i = 0;
    while per_first[i] - best > tol {
        i += 1;
    }
    i
}

pub fn random_state(rng: &mut ChaCha8Rng) -> StateVector {
    StateVector {
        v_bn: rng.random_range(0.0..250.0),
        v_cn: rng.random_range(0.0..250.0),
        i_lx: rng.random_range(-10.0..20.0),
        i_l1: rng.random_range(-10.0..20.0),
        i_l2: rng.random_range(-10.0..20.0),
    }
}

/// Design quantities written out term by term.
pub struct HandDesign {
    pub d_b: f64,
    pub d_c: f64,
    pub c_coup_1: f64,
    pub c_coup_2: f64,
    pub c_out: f64,
    pub l_1: f64,
    pub l_2: f64,
    pub l_x: f64,
}

pub fn hand_design(v_dc: f64, v_m: f64, i_m: f64, i_in_max: f64, t_s: f64) -> HandDesign {
    let f_min = 0.2 / (2.0 * t_s);
    let d_b = (v_dc + v_m) / (2.0 * v_dc + v_m);
    let d_c = (v_dc + 0.866 * v_m) / (2.0 * v_dc + 0.866 * v_m);
    let dv_coup = 0.05 * v_dc;
    let di_out = 0.3 * i_m;
    let dv_out = 0.1 * (v_dc + v_m);
    let di_in = 0.1 * i_in_max;
    HandDesign {
        d_b,
        d_c,
        c_coup_1: d_c * i_m / (dv_coup * f_min),
        c_coup_2: d_b * i_m / (dv_coup * f_min),
        c_out: di_out / (8.0 * dv_out * f_min),
        l_1: v_dc * d_b / (di_out * f_min),
        l_2: v_dc * d_c / (di_out * f_min),
        l_x: v_dc * if d_b > d_c { d_b } else { d_c } / (di_in * f_min),
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
