//! CSV and JSON writers for traces, sweeps, topology comparison and the
//! discrete model bank.

use std::io::Write;

use serde_json::{json, Value};

use crate::design::TopologyRow;
use crate::error::Result;
use crate::plant::ModelBank;
use crate::sim::Trace;
use crate::sweep::SweepRow;

pub const TRACE_HEADER: &str = "t,qx,q1,q2,v_bn,v_cn,i_lx,i_l1,i_l2,v_bn_ref,v_cn_ref,v_ab,v_bc,v_ca,cost";
pub const SWEEP_HEADER: &str = "np,lambda,thd_ab,thd_bc,thd_ca,rms_err_bn,rms_err_cn,fsw_x,fsw_1,fsw_2";
pub const COMPARE_HEADER: &str = "topology,switches,tvrs,utilization_gain";

/// Shortest decimal form of `x` rounded to 9 significant digits.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return "NaN".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    // avoid "-0"
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(trace: &Trace, mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        let [qx, q1, q2] = r.switch_state.bits();
        let cols = [
            r.x.v_bn, r.x.v_cn, r.x.i_lx, r.x.i_l1, r.x.i_l2, r.v_bn_ref, r.v_cn_ref, r.v_ab, r.v_bc, r.v_ca, r.cost,
        ];
        let mut line = format!("{},{qx},{q1},{q2}", format_number(r.t));
        for v in cols {
            line.push(',');
            line.push_str(&format_number(v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Failed cells keep their grid coordinates with empty metric fields.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in rows {
        let metrics = match &row.outcome {
            Ok(c) => [
                format_opt(c.thd[0]),
                format_opt(c.thd[1]),
                format_opt(c.thd[2]),
                format_number(c.rms_error[0]),
                format_number(c.rms_error[1]),
                format_number(c.fsw[0]),
                format_number(c.fsw[1]),
                format_number(c.fsw[2]),
            ]
            .join(","),
            Err(_) => ",,,,,,,".to_string(),
        };
        writeln!(out, "{},{},{metrics}", row.horizon, format_number(row.lambda))?;
    }
    Ok(())
}

pub fn write_compare_csv<W: Write>(rows: &[TopologyRow], mut out: W) -> Result<()> {
    writeln!(out, "{COMPARE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.topology,
            r.switches,
            format_number(r.tvrs),
            format_number(r.utilization_gain)
        )?;
    }
    Ok(())
}

/// Eight objects with the switch state and row-major `Φ` and `Γ`.
pub fn models_json(bank: &ModelBank) -> Value {
    let models: Vec<Value> = bank
        .models()
        .iter()
        .map(|m| {
            json!({
                "state": m.switch_state.bits(),
                "phi": m.phi_row_major(),
                "gamma": m.gamma_row_major(),
            })
        })
        .collect();
    Value::Array(models)
}
