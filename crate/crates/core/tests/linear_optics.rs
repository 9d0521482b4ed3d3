mod common;

use std::f64::consts::PI;

use common::{oracle_probs, oracle_unitary, phase_points};
use mzfid::linear_optics::{
    conditional_derivatives, fock_binomial_oracle, fock_input, mz_unitary, noon_input,
    outcome_distribution, MzConvention, TwoModeState, C64,
};
use mzfid::numerics::{central_difference, Order};
use proptest::prelude::*;

#[test]
fn unitary_matches_matrix_exponential() {
    let u = mz_unitary(5, 1.234, &MzConvention::default()).unwrap();
    let oracle = oracle_unitary(5, 1.234);
    for (a, b) in u.iter().zip(oracle.iter()) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn outcome_probabilities_sum_to_one_up_to_forty_photons() {
    let conv = MzConvention::default();
    for n in 1..=40 {
        for state in [fock_input(n).unwrap(), noon_input(n).unwrap()] {
            for phase in phase_points(100) {
                let p = outcome_distribution(&state, phase, &conv).unwrap();
                let total: f64 = p.probs.iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "N={n} phi={phase}: {total}");
                assert!(p.probs.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}

#[test]
fn fock_engine_equals_binomial_closed_form() {
    let conv = MzConvention::default();
    for n in 1..=40 {
        let state = fock_input(n).unwrap();
        for phase in phase_points(60) {
            let engine = outcome_distribution(&state, phase, &conv).unwrap();
            let oracle = fock_binomial_oracle(n, phase).unwrap();
            for (a, b) in engine.probs.iter().zip(&oracle.probs) {
                assert!((a - b).abs() < 1e-10, "N={n} phi={phase}");
            }
        }
    }
}

#[test]
fn fock_probabilities_are_even_in_phase() {
    let conv = MzConvention::default();
    for n in [1, 4, 9, 25] {
        let state = fock_input(n).unwrap();
        for phase in phase_points(40).into_iter().filter(|x| *x < PI) {
            let a = outcome_distribution(&state, phase, &conv).unwrap();
            let b = outcome_distribution(&state, -phase, &conv).unwrap();
            for (x, y) in a.probs.iter().zip(&b.probs) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn two_photon_noon_is_constant() {
    let state = noon_input(2).unwrap();
    for phase in phase_points(200) {
        let p = outcome_distribution(&state, phase, &MzConvention::default()).unwrap();
        assert!((p.probs[0] - 0.5).abs() < 1e-13);
        assert!(p.probs[1].abs() < 1e-13);
        assert!((p.probs[2] - 0.5).abs() < 1e-13);
    }
}

#[test]
fn noon_matches_generator_oracle() {
    for n in [3, 6, 11] {
        let state = noon_input(n).unwrap();
        for phase in phase_points(25) {
            let engine = outcome_distribution(&state, phase, &MzConvention::default()).unwrap();
            let oracle = oracle_probs(state.amplitudes(), phase);
            for (a, b) in engine.probs.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn three_photon_noon_derivatives_match_finite_differences() {
    let state = noon_input(3).unwrap();
    let conv = MzConvention::default();
    let d = conditional_derivatives(&state, 0.4, &conv).unwrap();
    for m in 0..4 {
        let f = |x: f64| outcome_distribution(&state, x, &conv).unwrap().probs[m];
        let d1 = central_difference(f, 0.4, Order::First, 1e-4);
        let d2 = central_difference(f, 0.4, Order::Second, 1e-4);
        assert!(
            (d.first[m] - d1).abs() < 1e-6,
            "m={m}: {} vs {d1}",
            d.first[m]
        );
        assert!(
            (d.second[m] - d2).abs() < 1e-6,
            "m={m}: {} vs {d2}",
            d.second[m]
        );
    }
}

fn arb_state() -> impl Strategy<Value = TwoModeState> {
    (1usize..=12)
        .prop_flat_map(|n| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1))
        .prop_filter_map("non-zero vector", |raw| {
            let norm: f64 = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| {
                TwoModeState::new(
                    raw.iter()
                        .map(|(a, b)| C64::new(a / norm, b / norm))
                        .collect(),
                )
                .unwrap()
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_sums_vanish(state in arb_state(), phase in -3.1f64..3.1) {
        let d = conditional_derivatives(&state, phase, &MzConvention::default()).unwrap();
        prop_assert!(d.first.iter().sum::<f64>().abs() < 1e-8);
        prop_assert!(d.second.iter().sum::<f64>().abs() < 1e-8);
    }

    #[test]
    fn derivatives_agree_with_finite_differences(state in arb_state(), phase in -3.0f64..3.0) {
        let conv = MzConvention::default();
        let d = conditional_derivatives(&state, phase, &conv).unwrap();
        for m in 0..d.first.len() {
            let f = |x: f64| outcome_distribution(&state, x, &conv).unwrap().probs[m];
            let d1 = central_difference(f, phase, Order::First, 1e-4);
            let d2 = central_difference(f, phase, Order::Second, 1e-4);
            let scale = (state.photons() as f64).powi(2);
            prop_assert!((d.first[m] - d1).abs() < 1e-6 * scale, "m={} {} vs {}", m, d.first[m], d1);
            prop_assert!((d.second[m] - d2).abs() < 1e-6 * scale, "m={} {} vs {}", m, d.second[m], d2);
        }
    }

    #[test]
    fn any_state_is_normalized(state in arb_state(), phase in -3.1f64..3.1) {
        let p = outcome_distribution(&state, phase, &MzConvention::default()).unwrap();
        prop_assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
