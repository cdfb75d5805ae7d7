// Copyright 2026 The epp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Property-based invariants: probability normalization of every map,
//! twirl idempotence, unitarity of the optical elements on arbitrary
//! states, postselection completeness, and the monotonicity guarantees of
//! the purification recursions.

use epp::bell_core::{
    bbpssw_round, dejmps_round, make_werner, pan_pbs_round, twirl, BellDiagonalState,
};
use epp::hyper_epp::single_copy_round;
use epp::mbepp::{logical_pg, mbepp_round_physical, LossModel, QpcParams};
use epp::optics_engine::{
    apply_element, postselect, Complex64, OccupationKey, OpticalElement, OpticalState,
    Polarization, PostselectionRule,
};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn weights() -> impl Strategy<Value = [f64; 4]> {
    [0.01..1.0f64, 0.01..1.0f64, 0.01..1.0f64, 0.01..1.0f64].prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.map(|x| x / total)
    })
}

fn rank2_weights() -> impl Strategy<Value = [f64; 4]> {
    (0.05..0.95f64).prop_map(|f| [f, 0.0, 1.0 - f, 0.0])
}

proptest! {
    #[test]
    fn two_copy_rounds_conserve_probability(w in weights()) {
        let state = BellDiagonalState::new(w).unwrap();
        for round in [
            bbpssw_round(&state).unwrap(),
            dejmps_round(&state).unwrap(),
            mbepp_round_physical(&state, &state).unwrap(),
        ] {
            prop_assert!(round.success_prob > 0.0 && round.success_prob <= 1.0 + TOL);
            let sum: f64 = round.output.weights().iter().sum();
            prop_assert!((sum - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn pbs_round_conserves_probability(w in rank2_weights()) {
        let round = pan_pbs_round(&BellDiagonalState::new(w).unwrap()).unwrap();
        prop_assert!(round.success_prob > 0.0 && round.success_prob <= 0.5 + TOL);
        let sum: f64 = round.output.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() < TOL);
    }

    #[test]
    fn twirl_is_idempotent_and_fidelity_preserving(w in weights()) {
        let state = BellDiagonalState::new(w).unwrap();
        let once = twirl(&state);
        let twice = twirl(&once);
        prop_assert!((once.fidelity() - state.fidelity()).abs() < TOL);
        for k in 0..4 {
            prop_assert!((once.weights()[k] - twice.weights()[k]).abs() < TOL);
        }
    }

    #[test]
    fn measurement_based_round_equals_the_gate_based_round(w in weights()) {
        // Same keep condition (equal amplitude errors), same output
        // component (x₁, z₁ ⊕ z₂): the physical measurement-based round and
        // the bilateral-CNOT round induce one map.
        let state = BellDiagonalState::new(w).unwrap();
        let mb = mbepp_round_physical(&state, &state).unwrap();
        let gate = bbpssw_round(&state).unwrap();
        prop_assert!((mb.success_prob - gate.success_prob).abs() < TOL);
        for k in 0..4 {
            prop_assert!((mb.output.weights()[k] - gate.output.weights()[k]).abs() < TOL);
        }
    }

    #[test]
    fn purification_improves_fidelity_above_one_half(f in 0.5001..0.9999f64) {
        let rank2 = BellDiagonalState::new([f, 0.0, 1.0 - f, 0.0]).unwrap();
        prop_assert!(pan_pbs_round(&rank2).unwrap().output.fidelity() > f);
        let werner_round = bbpssw_round(&make_werner(f).unwrap()).unwrap();
        prop_assert!(twirl(&werner_round.output).fidelity() > f);
    }

    #[test]
    fn single_copy_round_dominates_its_inputs(
        fp in 0.5001..0.9999f64,
        fs in 0.5001..0.9999f64,
    ) {
        let round = single_copy_round(fp, fs).unwrap();
        prop_assert!(round.output.fidelity() > fp.max(fs));
        let sum: f64 = round.output.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() < TOL);
    }

    #[test]
    fn logical_success_is_monotone_in_transmission(
        eta_low in 0.05..0.95f64,
        gap in 0.001..0.05f64,
        f in 0.5..1.0f64,
    ) {
        let qpc = QpcParams::new(2, 2).unwrap();
        let low = logical_pg(&qpc, &LossModel { eta: eta_low }, f).unwrap();
        let high = logical_pg(&qpc, &LossModel { eta: eta_low + gap }, f).unwrap();
        prop_assert!(low >= 0.0 && high <= 1.0 + TOL);
        prop_assert!(high >= low - TOL);
    }
}

/// Random sparse Fock states for the engine properties.
fn fock_state() -> impl Strategy<Value = OpticalState<Complex64>> {
    let slot_counts = proptest::collection::vec(0u8..3, 4);
    let component = (slot_counts, -1.0..1.0f64, -1.0..1.0f64);
    proptest::collection::vec(component, 1..6).prop_map(|components| {
        let mut state = OpticalState::empty(8);
        for (counts, re, im) in components {
            let slots: Vec<(String, Polarization, u8)> = counts
                .iter()
                .enumerate()
                .filter(|(_, n)| **n > 0)
                .map(|(i, n)| {
                    let path = if i < 2 { "a" } else { "b" };
                    let pol = if i % 2 == 0 { Polarization::H } else { Polarization::V };
                    (path.to_string(), pol, *n)
                })
                .collect();
            state
                .accumulate(OccupationKey::from_slots(slots), Complex64::new(re, im))
                .unwrap();
        }
        state
    })
}

fn any_element() -> impl Strategy<Value = OpticalElement> {
    let s = |x: &str| x.to_string();
    prop_oneof![
        Just(OpticalElement::Pbs { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") }),
        Just(OpticalElement::Cpbs { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") }),
        Just(OpticalElement::Bd { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") }),
        Just(OpticalElement::Bs { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") }),
        Just(OpticalElement::Hwp { mode: s("a") }),
        Just(OpticalElement::Swap { a: s("a"), b: s("b") }),
        (0u8..4).prop_map(|qt| OpticalElement::Phase {
            mode: "a".into(),
            polarization: None,
            quarter_turns: qt,
        }),
        (0u8..4).prop_map(|qt| OpticalElement::Phase {
            mode: "b".into(),
            polarization: Some(Polarization::V),
            quarter_turns: qt,
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optical_elements_are_unitary(state in fock_state(), element in any_element()) {
        let before = state.norm_sqr().re;
        let after = apply_element(&state, &element).unwrap().norm_sqr().re;
        prop_assert!((before - after).abs() <= TOL * before.max(1.0));
    }

    #[test]
    fn postselection_branches_are_complete(state in fock_state()) {
        let rule = PostselectionRule::one_photon_each(&["a", "b"]);
        let (kept_prob, kept) = postselect(&state, &rule).unwrap();
        let mut complement = state.clone();
        complement.retain_filter(|k| !rule.matches(k));
        let total = state.norm_sqr().re;
        prop_assert!(
            (kept_prob + complement.norm_sqr().re - total).abs() <= TOL * total.max(1.0)
        );
        prop_assert!((kept.norm_sqr().re - kept_prob).abs() <= TOL * total.max(1.0));
    }
}
