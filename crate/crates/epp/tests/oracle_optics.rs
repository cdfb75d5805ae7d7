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

//! Physical invariants of the Fock-space engine: element unitarity on
//! random multi-photon states, bosonic interference, postselection
//! completeness, measurement completeness, and the exact heralding
//! structure of the wired protocol circuits.

use epp::bell_core::BellDiagonalState;
use epp::optics_engine::{
    apply_element, build_preset, measure_polarization, postselect, run_protocol,
    spdc_doublepair_fidelity, verify_against_analytic, Amplitude, Complex64, ExactAmp,
    MeasurementBasis,
    OccupationKey, OpticalElement, OpticalState, Polarization, PostselectionRule, PresetParams,
    Rational, PRESET_NAMES,
};
use epp::scalar::Scalar;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn sample_elements() -> Vec<OpticalElement> {
    let s = |x: &str| x.to_string();
    vec![
        OpticalElement::Pbs { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") },
        OpticalElement::Cpbs { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") },
        OpticalElement::Bd { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") },
        OpticalElement::Bs { in1: s("a"), in2: s("b"), out1: s("c"), out2: s("d") },
        OpticalElement::Hwp { mode: s("a") },
        OpticalElement::Phase { mode: s("a"), polarization: None, quarter_turns: 1 },
        OpticalElement::Phase {
            mode: s("b"),
            polarization: Some(Polarization::V),
            quarter_turns: 2,
        },
        OpticalElement::Swap { a: s("a"), b: s("b") },
    ]
}

/// A random state on paths a, b with up to 2 photons per slot.
fn random_state(rng: &mut impl Rng) -> OpticalState<Complex64> {
    let mut state = OpticalState::empty(8);
    for _ in 0..6 {
        let mut slots = Vec::new();
        for path in ["a", "b"] {
            for pol in [Polarization::H, Polarization::V] {
                let n: u8 = rng.gen_range(0..3);
                if n > 0 {
                    slots.push((path.to_string(), pol, n));
                }
            }
        }
        let amp = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        state
            .accumulate(OccupationKey::from_slots(slots), amp)
            .unwrap();
    }
    state
}

#[test]
fn every_element_preserves_the_norm_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for element in sample_elements() {
        for _ in 0..20 {
            let state = random_state(&mut rng);
            let before = state.norm_sqr().re;
            let after = apply_element(&state, &element).unwrap().norm_sqr().re;
            assert!(
                (before - after).abs() < TOL * before.max(1.0),
                "{element:?} changed the norm: {before} → {after}"
            );
        }
    }
}

#[test]
fn elements_preserve_the_norm_exactly_in_the_rational_ring() {
    // One photon of each polarization on both inputs — the bosonic factors
    // (√2 from doubled slots) must cancel identically, not just to 1e-12.
    let mut state: OpticalState<ExactAmp> = OpticalState::empty(8);
    state
        .accumulate(
            OccupationKey::from_slots([
                ("a".to_string(), Polarization::H, 1),
                ("a".to_string(), Polarization::V, 1),
                ("b".to_string(), Polarization::H, 2),
            ]),
            ExactAmp::from_ratio(1, 2),
        )
        .unwrap();
    state
        .accumulate(
            OccupationKey::from_slots([("b".to_string(), Polarization::V, 2)]),
            ExactAmp::from_ratio(1, 2).div_sqrt(2).unwrap(),
        )
        .unwrap();
    let before = state.norm_sqr();
    for element in sample_elements() {
        let after = apply_element(&state, &element).unwrap().norm_sqr();
        assert_eq!(before, after, "{element:?} is not exactly unitary");
    }
}

#[test]
fn hong_ou_mandel_coincidences_vanish_identically() {
    // Two indistinguishable photons on a 50:50 splitter bunch: the
    // one-photon-per-output amplitude is exactly zero.
    let mut state: OpticalState<ExactAmp> = OpticalState::empty(4);
    state
        .accumulate(
            OccupationKey::from_slots([
                ("a".to_string(), Polarization::H, 1),
                ("b".to_string(), Polarization::H, 1),
            ]),
            ExactAmp::one(),
        )
        .unwrap();
    let bs = OpticalElement::Bs {
        in1: "a".into(),
        in2: "b".into(),
        out1: "c".into(),
        out2: "d".into(),
    };
    let out = apply_element(&state, &bs).unwrap();
    let coincidence = out.amplitude(&OccupationKey::from_slots([
        ("c".to_string(), Polarization::H, 1),
        ("d".to_string(), Polarization::H, 1),
    ]));
    assert!(coincidence.is_zero());
    // Distinguishable photons (orthogonal polarizations) never bunch away.
    let mut mixed: OpticalState<ExactAmp> = OpticalState::empty(4);
    mixed
        .accumulate(
            OccupationKey::from_slots([
                ("a".to_string(), Polarization::H, 1),
                ("b".to_string(), Polarization::V, 1),
            ]),
            ExactAmp::one(),
        )
        .unwrap();
    let out = apply_element(&mixed, &bs).unwrap();
    let coincidence = out.amplitude(&OccupationKey::from_slots([
        ("c".to_string(), Polarization::H, 1),
        ("d".to_string(), Polarization::V, 1),
    ]));
    assert!(!coincidence.is_zero());
}

#[test]
fn postselection_partitions_the_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let state = random_state(&mut rng);
        let rule = PostselectionRule::one_photon_each(&["a", "b"]);
        let (prob, kept) = postselect(&state, &rule).unwrap();
        // Independent accounting straight from the components.
        let mut matched = 0.0;
        let mut rest = 0.0;
        for (key, amp) in state.components() {
            if rule.matches(key) {
                matched += amp.norm_sqr();
            } else {
                rest += amp.norm_sqr();
            }
        }
        assert!((prob - matched).abs() < TOL);
        assert!((kept.norm_sqr().re - matched).abs() < TOL);
        assert!((matched + rest - state.norm_sqr().re).abs() < TOL);
        for (key, _) in kept.components() {
            assert!(rule.matches(key), "postselected state kept a non-matching key");
        }
    }
}

#[test]
fn polarization_measurement_outcomes_are_complete() {
    // A Bell pair measured in the ± basis on both paths: four outcomes with
    // probabilities summing to the state norm, correlations fixed by the
    // Bell component.
    let mut state: OpticalState<Complex64> = OpticalState::empty(4);
    for (pol_a, pol_b, sign) in [
        (Polarization::H, Polarization::H, 1.0),
        (Polarization::V, Polarization::V, 1.0),
    ] {
        state
            .accumulate(
                OccupationKey::from_slots([
                    ("a".to_string(), pol_a, 1),
                    ("b".to_string(), pol_b, 1),
                ]),
                Complex64::new(sign * std::f64::consts::FRAC_1_SQRT_2, 0.0),
            )
            .unwrap();
    }
    let outcomes =
        measure_polarization(&state, &["a".to_string(), "b".to_string()], MeasurementBasis::Pm)
            .unwrap();
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    assert!((total - 1.0).abs() < TOL);
    for outcome in &outcomes {
        // Φ⁺ measured in ± is correlated: ++ and −− each 1/2.
        let expected = if outcome.outcomes[0] == outcome.outcomes[1] {
            0.5
        } else {
            0.0
        };
        assert!((outcome.probability - expected).abs() < TOL);
    }
}

fn rational_weights(w: [(i64, i64); 4]) -> [Rational; 4] {
    w.map(|(n, d)| Rational::new(n, d))
}

#[test]
fn pbs_circuit_rejects_cross_combinations_exactly() {
    // With an equal {Φ⁺, Ψ⁺} mixture, only the Φ⊗Φ and Ψ⊗Ψ combinations
    // reach the four-mode coincidence: success is exactly
    // (1/4 + 1/4)/2 and the output reproduces the input weights.
    let mut params = PresetParams::default();
    params.bell_weights = Some(rational_weights([(1, 2), (0, 1), (1, 2), (0, 1)]));
    let spec = build_preset("pan2001", &params).unwrap();
    let result = run_protocol::<ExactAmp>(&spec).unwrap();
    let quarter = <BigRational as Scalar>::from_ratio(1, 4);
    let half = <BigRational as Scalar>::from_ratio(1, 2);
    assert_eq!(result.success_prob, quarter);
    assert_eq!(result.output.weights()[0], half);
    assert_eq!(result.output.weights()[2], half);
}

#[test]
fn deterministic_circuit_keeps_every_branch_exactly() {
    let mut params = PresetParams::default();
    params.bell_weights = Some(rational_weights([(2, 5), (1, 5), (3, 10), (1, 10)]));
    let spec = build_preset("deterministic_epp", &params).unwrap();
    let result = run_protocol::<ExactAmp>(&spec).unwrap();
    assert_eq!(result.success_prob, <BigRational as Scalar>::from_ratio(1, 1));
    assert_eq!(result.output.fidelity(), <BigRational as Scalar>::from_ratio(1, 1));
}

#[test]
fn spdc_double_pair_anchor_is_thirteen_fourteenths() {
    let params = PresetParams::default(); // F = 3/4
    let spec = build_preset("pan2003_spdc", &params).unwrap();
    let result = run_protocol::<ExactAmp>(&spec).unwrap();
    assert_eq!(
        result.output.fidelity(),
        <BigRational as Scalar>::from_ratio(13, 14)
    );
    // And the closed form agrees at the anchor.
    assert_eq!(
        spdc_doublepair_fidelity(<BigRational as Scalar>::from_ratio(3, 4)),
        <BigRational as Scalar>::from_ratio(13, 14)
    );
}

#[test]
fn engine_matches_the_analytic_map_on_a_dense_grid() {
    // 20-point fidelity grid through the floating-point engine, compared
    // with the closed-form parity-check map at 1e-9.
    let params = PresetParams::default();
    let grid: Vec<f64> = (0..20).map(|i| 0.05 + 0.9 * i as f64 / 19.0).collect();
    let report = verify_against_analytic("pan2001", &params, |f| {
        let state = BellDiagonalState::new([f, 0.0, 1.0 - f, 0.0])?;
        let round = epp::bell_core::pan_pbs_round(&state)?;
        let w = round.output.weights();
        Ok((round.success_prob, [w[0], w[1], w[2], w[3]]))
    }, &grid)
    .unwrap();
    assert!(report.passed(), "max deviation {}", report.max_deviation);
    assert_eq!(report.rows.len(), 20);
}

#[test]
fn every_preset_builds_and_runs() {
    for name in PRESET_NAMES {
        let spec = build_preset(name, &PresetParams::default()).unwrap();
        let result = run_protocol::<Complex64>(&spec).unwrap();
        assert!(result.success_prob > 0.0 && result.success_prob <= 1.0 + TOL);
        let sum: f64 = result.output.weights().iter().sum();
        assert!((sum - 1.0).abs() < TOL, "{name}: weights sum to {sum}");
    }
    assert!(build_preset("no_such_preset", &PresetParams::default()).is_err());
}
