//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisw_core::design::{comparison_report, max_duty, size_components, DesignInputs, RippleTargets};
use trisw_core::metrics::{compute_metrics, settle_time, thd, DEFAULT_MAX_HARMONIC, DEFAULT_SETTLE_BAND};
use trisw_core::mpc::{select_switch_state, MpcConfig, PredictionScheme, TieBreak};
use trisw_core::plant::{assemble_continuous, CircuitParams, InputVector, ModelBank, ModelVariant, StateVector, SwitchState};
use trisw_core::sim::{run_closed_loop, Scenario};
use trisw_core::sweep::{best_by_mean_thd, grid, sweep};
use trisw_core::waveforms::{line_voltages, phase_references, ReferenceConfig, StepEvent};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within_budget(o: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    let detail = format!("{}; {:.2} s (budget {} s)", o.detail, elapsed.as_secs_f64(), budget.as_secs());
    outcome(o.pass && elapsed <= budget, detail)
}

fn timed(budget_s: u64, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    within_budget(o, start.elapsed(), Duration::from_secs(budget_s))
}

fn balanced_references() -> Outcome {
    timed(1, || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let v_dc = rng.random_range(10.0..1000.0);
            let v_m = rng.random_range(0.01 * v_dc..=v_dc);
            let cfg = ReferenceConfig::resistive(v_m, v_dc, rng.random_range(1.0..400.0), 50.0);
            let t = rng.random_range(0.0..0.1);
            let (ab, bc, ca) = line_voltages(t, &cfg);
            let (an, bn, cn) = phase_references(t, &cfg);
            let errs = [ab + bc + ca, ab - (an - bn), bc - (bn - cn), ca - (cn - an)];
            for e in errs {
                worst = worst.max(e.abs() / v_m);
            }
        }
        outcome(worst <= 1e-12, format!("worst relative residual {worst:.2e}"))
    })
}

fn zoh_exactness() -> Outcome {
    timed(5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = CircuitParams::default();
        let bank = ModelBank::build(&params, ModelVariant::ModeConsistent, 25e-6).unwrap();
        let mut worst = 0.0f64;
        for s in SwitchState::ALL {
            let cont = assemble_continuous(&params, s, ModelVariant::ModeConsistent);
            for _ in 0..20 {
                let x = common::random_state(&mut rng);
                let u = InputVector::nominal(params.v_dc);
                let got = common::state_array(&bank.get(s).step(&x, &u));
                let want = common::rk4(&cont, common::state_array(&x), common::input_array(&u), 25e-6, 1000);
                let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for i in 0..5 {
                    worst = worst.max((got[i] - want[i]).abs() / scale);
                }
            }
        }
        outcome(worst <= 1e-6, format!("worst relative deviation {worst:.2e}"))
    })
}

fn argmin_oracle() -> Outcome {
    timed(5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bank = ModelBank::build(&CircuitParams::default(), ModelVariant::ModeConsistent, 25e-6).unwrap();
        let mut mismatches = 0;
        let mut ties = 0;
        for case in 0..1000 {
            let horizon = rng.random_range(1..=3);
            let cfg = MpcConfig {
                horizon,
                lambda: [rng.random_range(0.0..if case % 4 == 0 { 1e4 } else { 1.0 }); 3],
                scheme: if horizon <= 2 && rng.random_bool(0.3) {
                    PredictionScheme::FullEnumeration
                } else {
                    PredictionScheme::Simplified
                },
                tie_break: if rng.random_bool(0.5) { TieBreak::PreferPrevious } else { TieBreak::LowestIndex },
                ..MpcConfig::default()
            };
            let (x, u) = if case % 5 == 0 {
                (StateVector::default(), InputVector { v_c1: 0.0, v_c2: 0.0, v_g: 0.0 })
            } else {
                (common::random_state(&mut rng), InputVector::nominal(100.0))
            };
            let refs: Vec<(f64, f64)> = (0..horizon)
                .map(|_| (rng.random_range(0.0..200.0), rng.random_range(0.0..200.0)))
                .collect();
            let prev = rng.random_range(0..8);
            let got = select_switch_state(&x, &u, &refs, &bank, &cfg, SwitchState::from_index(prev)).unwrap();
            if got.chosen.index() != common::brute_force_select(&bank, &x, &u, &refs, &cfg, prev) {
                mismatches += 1;
            }
            let c_min = got.candidate_costs.iter().copied().fold(f64::INFINITY, f64::min);
            if got.candidate_costs.iter().filter(|&&c| c - c_min <= 1e-12 * c_min.max(1.0)).count() > 1 {
                ties += 1;
            }
        }
        outcome(mismatches == 0 && ties > 0, format!("{mismatches} mismatches in 1000 cases, {ties} with ties"))
    })
}

/// Criteria 4 and 5 share one run.
fn tracking_and_switching() -> (Outcome, Outcome) {
    let start = Instant::now();
    let sc = Scenario::default();
    let run = run_closed_loop(&sc)
        .and_then(|tr| compute_metrics(&tr, sc.sim.warmup_cycles, DEFAULT_MAX_HARMONIC, DEFAULT_SETTLE_BAND));
    let elapsed = start.elapsed();
    let m = match run {
        Ok(m) => m,
        Err(e) => {
            let o = || outcome(false, format!("run failed: {e}"));
            return (o(), o());
        }
    };
    let thds = [m.thd_v_ab, m.thd_v_bc, m.thd_v_ca].map(|v| v.unwrap_or(f64::INFINITY));
    let tracking = outcome(
        m.rms_error_v_bn < 5.0 && m.rms_error_v_cn < 5.0 && thds.iter().all(|&v| v < 0.05),
        format!(
            "rms error {:.2} V / {:.2} V (limit 5 V), line THD {:.1}% / {:.1}% / {:.1}% (limit 5%)",
            m.rms_error_v_bn,
            m.rms_error_v_cn,
            100.0 * thds[0],
            100.0 * thds[1],
            100.0 * thds[2]
        ),
    );
    let f_max = 1.0 / (2.0 * sc.mpc.t_s);
    let fsw = m.fsw_per_switch;
    let switching = outcome(
        fsw.iter().all(|&f| f <= f_max) && fsw.iter().any(|&f| f > 1000.0),
        format!("per-switch frequency {:.0} / {:.0} / {:.0} Hz", fsw[0], fsw[1], fsw[2]),
    );
    let budget = Duration::from_secs(10);
    (within_budget(tracking, elapsed, budget), within_budget(switching, elapsed, budget))
}

fn sweep_optimum() -> Outcome {
    timed(120, || {
        let base = Scenario::default();
        let rows = sweep(&grid(&[1, 2, 3], &[0.05, 0.10, 0.5, 1.0]), &base, DEFAULT_MAX_HARMONIC);
        let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
        match best_by_mean_thd(&rows) {
            Some(best) => {
                let thd = best.outcome.as_ref().unwrap().mean_thd().unwrap();
                outcome(
                    failed == 0 && best.horizon <= 2 && best.lambda <= 0.10,
                    format!(
                        "minimum mean THD {:.1}% at n_p = {}, lambda = {}; {failed} failed cells",
                        100.0 * thd,
                        best.horizon,
                        best.lambda
                    ),
                )
            }
            None => outcome(false, "no cell produced a THD"),
        }
    })
}

fn step_response() -> Outcome {
    timed(10, || {
        let mut sc = Scenario::default();
        sc.sim.duration = 0.1;
        sc.sim.events = vec![StepEvent {
            time: 0.03,
            v_m: 50.0,
            freq: 100.0,
        }];
        match run_closed_loop(&sc) {
            Ok(tr) => match settle_time(&tr, 0.03, 5.0) {
                Some(t) => outcome(t - 0.03 <= 0.02, format!("settled {:.1} ms after the step", 1e3 * (t - 0.03))),
                None => outcome(false, "never settled within the +/-5 V band"),
            },
            Err(e) => outcome(false, format!("run failed: {e}")),
        }
    })
}

fn topology_scalars() -> Outcome {
    let rows = comparison_report(1.0).unwrap();
    let switches: Vec<u32> = rows.iter().map(|r| r.switches).collect();
    let tvrs_ok = [12.0 / 3f64.sqrt(), 8.0, 7.0]
        .iter()
        .zip(&rows)
        .all(|(want, r)| (r.tvrs - want).abs() <= 1e-12);
    let util_ok = (rows[0].utilization_gain - 1.1547).abs() <= 1e-4 && (rows[1].utilization_gain - 2.0).abs() <= 1e-4;
    outcome(
        switches == [6, 4, 3] && tvrs_ok && util_ok,
        format!(
            "switches {switches:?}, TVRS {:.6} / {} / {}, utilization {:.4} / {}",
            rows[0].tvrs, rows[1].tvrs, rows[2].tvrs, rows[0].utilization_gain, rows[1].utilization_gain
        ),
    )
}

fn design_formulas() -> Outcome {
    let base = DesignInputs {
        v_dc: 100.0,
        v_m: 100.0,
        i_m: 2.0,
        i_in_max: 2.0,
        t_s: 25e-6,
        phi_load: 0.0,
    };
    let (d_b, d_c) = max_duty(&base);
    let duty_ok = (d_b - 2.0 / 3.0).abs() <= 1e-12 && (d_c - 1.866 / 2.866).abs() <= 1e-12;
    let rep = size_components(&base, &RippleTargets::default()).unwrap();
    let freq_ok = rep.f_sw_max == 20_000.0 && rep.f_sw_min == 4_000.0;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v_dc = rng.random_range(10.0..1000.0);
        let inputs = DesignInputs {
            v_dc,
            v_m: rng.random_range(0.01 * v_dc..=v_dc),
            i_m: rng.random_range(0.1..50.0),
            i_in_max: rng.random_range(0.1..100.0),
            t_s: rng.random_range(1e-6..1e-4),
            phi_load: rng.random_range(0.0..=FRAC_PI_2),
        };
        let r = size_components(&inputs, &RippleTargets::default()).unwrap();
        let h = common::hand_design(inputs.v_dc, inputs.v_m, inputs.i_m, inputs.i_in_max, inputs.t_s);
        for (got, want) in [
            (r.d_max_b, h.d_b),
            (r.d_max_c, h.d_c),
            (r.c_coup_1, h.c_coup_1),
            (r.c_coup_2, h.c_coup_2),
            (r.c_out_3, h.c_out),
            (r.c_out_4, h.c_out),
            (r.l_1, h.l_1),
            (r.l_2, h.l_2),
            (r.l_x, h.l_x),
        ] {
            worst = worst.max((got - want).abs() / want.abs());
        }
    }
    outcome(
        duty_ok && freq_ok && worst <= 1e-12,
        format!(
            "d_max = ({d_b:.12}, {d_c:.12}), f_sw = {} / {} Hz, worst sizing deviation {worst:.1e}",
            rep.f_sw_max, rep.f_sw_min
        ),
    )
}

fn thd_fixtures() -> Outcome {
    let wave = |n: usize, f: &dyn Fn(f64) -> f64| -> Vec<f64> { (0..n).map(|i| f(i as f64 / n as f64)).collect() };
    // two cycles of 50 Hz at 50 kHz
    let sine = wave(2000, &|p| (TAU * 2.0 * p).sin());
    let mixed = wave(2000, &|p| (TAU * 2.0 * p).sin() + 0.1 * (TAU * 6.0 * p).sin());
    // one cycle with 102 samples: 50 harmonics span the resolvable band
    let square = wave(102, &|p| if p < 0.5 { 1.0 } else { -1.0 });
    let t_sine = thd(&sine, 50.0, 50_000.0, 50).unwrap();
    let t_mixed = thd(&mixed, 50.0, 50_000.0, 50).unwrap();
    let t_square = thd(&square, 50.0, 5_100.0, 50).unwrap();
    outcome(
        t_sine <= 1e-9 && (t_mixed - 0.1).abs() <= 1e-6 && (t_square - 0.483).abs() <= 0.002,
        format!("sine {t_sine:.1e}, sine + 10% third {t_mixed:.9}, square {t_square:.4}"),
    )
}

fn main() {
    let (c4, c5) = tracking_and_switching();
    let results = [
        (1, "balanced reference identity", balanced_references()),
        (2, "ZOH exactness", zoh_exactness()),
        (3, "MPC argmin oracle", argmin_oracle()),
        (4, "closed-loop tracking", c4),
        (5, "switching-frequency bound", c5),
        (6, "sweep optimum location", sweep_optimum()),
        (7, "step response", step_response()),
        (8, "topology comparison scalars", topology_scalars()),
        (9, "design formulas", design_formulas()),
        (10, "THD fixtures", thd_fixtures()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {n:>2} {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
