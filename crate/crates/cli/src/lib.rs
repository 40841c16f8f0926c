//! Subcommand implementations behind the `trisw` binary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use trisw_core::design::{comparison_report, size_components, DesignReport};
use trisw_core::metrics::compute_metrics;
use trisw_core::output::{models_json, write_compare_csv, write_sweep_csv, write_trace_csv};
use trisw_core::sweep::{best_by_mean_thd, grid, sweep};
use trisw_core::{run_closed_loop, Error, ModelBank, Result, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "trisw", version, about = "Three-switch inverter simulator with finite-set predictive control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one closed-loop simulation; writes trace.csv and metrics.json.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the discrete model bank to models.json.
        #[arg(long)]
        dump_models: bool,
    },
    /// Grid over prediction horizon and saturation weight; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "np", value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
    },
    /// Size passive components; writes design.json and prints a table.
    Design {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Switch count, voltage rating and dc utilization against two other
    /// inverters; writes compare.csv.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// 2 for configuration and file errors, 3 for the amplitude constraint,
/// 4 for numeric failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Io(_) => 2,
        Error::Constraint(_) => 3,
        Error::Numeric { .. } => 4,
    }
}

fn load(config: Option<&Path>) -> Result<RunConfig> {
    match config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn output_dir(cli_out: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cli_out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn simulate(cfg: &RunConfig, dir: &Path, dump_models: bool) -> Result<()> {
    let sc = &cfg.scenario;
    let trace = run_closed_loop(sc)?;
    let metrics = compute_metrics(&trace, sc.sim.warmup_cycles, cfg.max_harmonic, cfg.settle_band)?;
    let mut w = create(dir, "trace.csv")?;
    write_trace_csv(&trace, &mut w)?;
    w.flush()?;
    write_json(dir, "metrics.json", &metrics)?;
    if dump_models {
        let bank = ModelBank::build(&sc.circuit, sc.variant, sc.mpc.t_s)?;
        write_json(dir, "models.json", &models_json(&bank))?;
    }
    let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{:.2}%", 100.0 * x));
    println!(
        "samples {}  rms error {:.3} V / {:.3} V  THD {} / {} / {}",
        trace.records.len(),
        metrics.rms_error_v_bn,
        metrics.rms_error_v_cn,
        pct(metrics.thd_v_ab),
        pct(metrics.thd_v_bc),
        pct(metrics.thd_v_ca)
    );
    Ok(())
}

fn run_sweep(cfg: &RunConfig, dir: &Path, horizons: &[usize], lambdas: &[f64]) -> Result<()> {
    let rows = sweep(&grid(horizons, lambdas), &cfg.scenario, cfg.max_harmonic);
    let mut w = create(dir, "sweep.csv")?;
    write_sweep_csv(&rows, &mut w)?;
    w.flush()?;
    for row in rows.iter().filter(|r| r.outcome.is_err()) {
        if let Err(e) = &row.outcome {
            eprintln!("cell n_p={} lambda={} failed: {e}", row.horizon, row.lambda);
        }
    }
    if let Some(best) = best_by_mean_thd(&rows) {
        println!("lowest mean THD at n_p={} lambda={}", best.horizon, best.lambda);
    }
    Ok(())
}

fn print_design(r: &DesignReport) {
    let rows = [
        ("d_max_b", r.d_max_b, ""),
        ("d_max_c", r.d_max_c, ""),
        ("f_sw_max", r.f_sw_max, "Hz"),
        ("f_sw_min", r.f_sw_min, "Hz"),
        ("c_coup_1", r.c_coup_1, "F"),
        ("c_coup_2", r.c_coup_2, "F"),
        ("c_out_3", r.c_out_3, "F"),
        ("c_out_4", r.c_out_4, "F"),
        ("l_1", r.l_1, "H"),
        ("l_2", r.l_2, "H"),
        ("l_x", r.l_x, "H"),
    ];
    for (name, value, unit) in rows {
        println!("{name:<10} {value:>14.6e} {unit}");
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            dump_models,
        } => {
            let cfg = load(config.as_deref())?;
            let dir = output_dir(out, &cfg)?;
            simulate(&cfg, &dir, dump_models)
        }
        Command::Sweep {
            config,
            out,
            horizons,
            lambda,
        } => {
            let cfg = load(config.as_deref())?;
            let dir = output_dir(out, &cfg)?;
            run_sweep(&cfg, &dir, &horizons, &lambda)
        }
        Command::Design { config, out } => {
            let cfg = load(config.as_deref())?;
            let dir = output_dir(out, &cfg)?;
            let report = size_components(&cfg.design_inputs(), &cfg.ripple)?;
            write_json(&dir, "design.json", &report)?;
            print_design(&report);
            Ok(())
        }
        Command::Compare { config, out } => {
            let cfg = load(config.as_deref())?;
            let dir = output_dir(out, &cfg)?;
            let rows = comparison_report(cfg.scenario.reference.v_m)?;
            let mut w = create(&dir, "compare.csv")?;
            write_compare_csv(&rows, &mut w)?;
            w.flush()?;
            for r in &rows {
                println!("{:<13} {} switches  TVRS {:>8.2} V  gain {:.4}", r.topology, r.switches, r.tvrs, r.utilization_gain);
            }
            Ok(())
        }
    }
}
