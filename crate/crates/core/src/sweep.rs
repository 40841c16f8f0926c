//! Grid study of prediction horizon and saturation weight.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::metrics::{compute_metrics, DEFAULT_SETTLE_BAND};
use crate::sim::{run_closed_loop, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub thd: [Option<f64>; 3],
    pub rms_error: [f64; 2],
    pub fsw: [f64; 3],
}

impl SweepCell {
    pub fn mean_thd(&self) -> Option<f64> {
        Some((self.thd[0]? + self.thd[1]? + self.thd[2]?) / 3.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub horizon: usize,
    pub lambda: f64,
    /// Failed cells keep their error; the rest of the grid still runs.
    pub outcome: Result<SweepCell>,
}

/// Cartesian grid, horizon-major.
pub fn grid(horizons: &[usize], lambdas: &[f64]) -> Vec<(usize, f64)> {
    horizons
        .iter()
        .flat_map(|&n| lambdas.iter().map(move |&l| (n, l)))
        .collect()
}

fn run_cell(base: &Scenario, horizon: usize, lambda: f64, max_harmonic: usize) -> Result<SweepCell> {
    let mut sc = base.clone();
    sc.mpc.horizon = horizon;
    sc.mpc.lambda = [lambda; 3];
    let trace = run_closed_loop(&sc)?;
    let m = compute_metrics(&trace, sc.sim.warmup_cycles, max_harmonic, DEFAULT_SETTLE_BAND)?;
    Ok(SweepCell {
        thd: [m.thd_v_ab, m.thd_v_bc, m.thd_v_ca],
        rms_error: [m.rms_error_v_bn, m.rms_error_v_cn],
        fsw: m.fsw_per_switch,
    })
}

/// One independent closed-loop run per cell, executed in parallel. Rows
/// come back in grid order.
pub fn sweep(cells: &[(usize, f64)], base: &Scenario, max_harmonic: usize) -> Vec<SweepRow> {
    cells
        .par_iter()
        .map(|&(horizon, lambda)| SweepRow {
            horizon,
            lambda,
            outcome: run_cell(base, horizon, lambda, max_harmonic),
        })
        .collect()
}

/// Row with the lowest mean line THD; the earliest in grid order wins ties.
pub fn best_by_mean_thd(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter()
        .filter_map(|r| Some((r, r.outcome.as_ref().ok()?.mean_thd()?)))
        .fold(None::<(&SweepRow, f64)>, |best, (r, v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((r, v)),
        })
        .map(|(r, _)| r)
}
