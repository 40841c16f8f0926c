mod common;

use common::{rel_close, rk4, state_array};
use nalgebra::{Matrix5, Matrix5x3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisw_core::plant::{assemble_continuous, zoh_discretize, CircuitParams, InputVector, ModelVariant, StateVector, SwitchState};

fn perturbed(rng: &mut ChaCha8Rng) -> CircuitParams {
    let base = CircuitParams::default();
    let mut k = || rng.random_range(0.7..1.3);
    CircuitParams {
        l_x: base.l_x * k(),
        l_1: base.l_1 * k(),
        l_2: base.l_2 * k(),
        c_1: base.c_1 * k(),
        c_2: base.c_2 * k(),
        c_3: base.c_3 * k(),
        c_4: base.c_4 * k(),
        r_lx: base.r_lx * k(),
        r_l1: base.r_l1 * k(),
        r_l2: base.r_l2 * k(),
        r_c3: base.r_c3 * k(),
        r_c4: base.r_c4 * k(),
        r_load: base.r_load * k(),
        v_dc: base.v_dc,
    }
}

#[test]
fn zoh_matches_fine_runge_kutta() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for params in [CircuitParams::default(), perturbed(&mut rng)] {
        for s in SwitchState::ALL {
            let cont = assemble_continuous(&params, s, ModelVariant::ModeConsistent);
            let disc = zoh_discretize(&cont, 25e-6).unwrap();
            for _ in 0..5 {
                let x = common::random_state(&mut rng);
                let u = InputVector {
                    v_c1: rng.random_range(50.0..150.0),
                    v_c2: rng.random_range(50.0..150.0),
                    v_g: rng.random_range(50.0..150.0),
                };
                let got = state_array(&disc.step(&x, &u));
                let want = rk4(&cont, state_array(&x), common::input_array(&u), 25e-6, 1000);
                let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for i in 0..5 {
                    assert!((got[i] - want[i]).abs() <= 1e-6 * scale, "state {s}, component {i}: {} vs {}", got[i], want[i]);
                }
            }
        }
    }
}

#[test]
fn input_matrix_matches_inverse_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..6 {
        let params = if trial == 0 { CircuitParams::default() } else { perturbed(&mut rng) };
        for s in SwitchState::ALL {
            let cont = assemble_continuous(&params, s, ModelVariant::ModeConsistent);
            let disc = zoh_discretize(&cont, 25e-6).unwrap();
            let g_inv = cont.g.try_inverse().expect("dissipative model has invertible G");
            let oracle: Matrix5x3<f64> = g_inv * (disc.phi - Matrix5::identity()) * cont.h;
            let scale = oracle.amax().max(1e-30);
            assert!((disc.gamma - oracle).amax() <= 1e-9 * scale, "state {s}");
        }
    }
}

#[test]
fn transition_matrix_has_third_order_remainder() {
    let params = CircuitParams::default();
    for s in SwitchState::ALL {
        let cont = assemble_continuous(&params, s, ModelVariant::ModeConsistent);
        let remainder = |t: f64| {
            let phi = zoh_discretize(&cont, t).unwrap().phi;
            let g = cont.g * t;
            (phi - (Matrix5::identity() + g + g * g / 2.0)).amax()
        };
        let ratio = remainder(1e-6) / remainder(5e-7);
        assert!((ratio - 8.0).abs() < 0.1, "state {s}: ratio {ratio}");
    }
}

#[test]
fn singular_state_matrix_is_discretized() {
    // lossless circuit with an open load: G has zero rows
    let params = CircuitParams {
        r_lx: 0.0,
        r_l1: 0.0,
        r_l2: 0.0,
        r_c3: 0.0,
        r_c4: 0.0,
        ..CircuitParams::default()
    };
    let mut cont = assemble_continuous(&params, SwitchState::new(true, false, false), ModelVariant::ModeConsistent);
    cont.g = Matrix5::zeros();
    let disc = zoh_discretize(&cont, 25e-6).unwrap();
    assert_eq!(disc.phi, Matrix5::identity());
    assert!((disc.gamma - cont.h * 25e-6).amax() < 1e-18);
    let x = StateVector::default();
    let next = disc.step(&x, &InputVector::nominal(100.0));
    assert!(rel_close(next.i_lx, 100.0 / params.l_x * 25e-6, 1e-12));
}
