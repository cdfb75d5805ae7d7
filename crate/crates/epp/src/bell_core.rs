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

//! Bell-basis algebra and the gate-based bipartite purification maps.
//!
//! A two-qubit mixture that is diagonal in the Bell basis
//! {|Φ⁺⟩, |Φ⁻⟩, |Ψ⁺⟩, |Ψ⁻⟩} is fully described by four probabilities.
//! Every bipartite protocol in this crate maps such mixtures to such
//! mixtures; this module implements the recursion maps exactly:
//!
//! * [`bbpssw_round`] — bilateral CNOT on two identical copies, keep the
//!   source pair when the Z measurements of the target pair agree;
//! * [`dejmps_round`] — the same, preceded by the bilateral ±i rotations,
//!   which lifts the Werner restriction;
//! * [`pan_pbs_round`] — the polarizing-beam-splitter parity check on
//!   rank-2 {Φ⁺, Ψ⁺} mixtures.
//!
//! All maps are generic over [`Scalar`], so they run exactly on rational
//! inputs and in `f64` otherwise.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance for normalization and support checks in floating point.
pub const NORM_TOL: f64 = 1e-12;

/// One of the four Bell components, identified by two bits:
/// amplitude (Φ-type = 0, Ψ-type = 1) and phase (+ = 0, − = 1).
///
/// |Φ±⟩ = (|00⟩ ± |11⟩)/√2,  |Ψ±⟩ = (|01⟩ ± |10⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellComponent {
    /// 0 for Φ-type (correlated), 1 for Ψ-type (anticorrelated).
    pub amplitude_bit: u8,
    /// 0 for the + superposition, 1 for −.
    pub phase_bit: u8,
}

impl BellComponent {
    pub const PHI_PLUS: Self = Self { amplitude_bit: 0, phase_bit: 0 };
    pub const PHI_MINUS: Self = Self { amplitude_bit: 0, phase_bit: 1 };
    pub const PSI_PLUS: Self = Self { amplitude_bit: 1, phase_bit: 0 };
    pub const PSI_MINUS: Self = Self { amplitude_bit: 1, phase_bit: 1 };

    /// All four components in index order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
    pub const ALL: [Self; 4] = [
        Self::PHI_PLUS,
        Self::PHI_MINUS,
        Self::PSI_PLUS,
        Self::PSI_MINUS,
    ];

    /// Construct from the two identifying bits.
    pub fn new(amplitude_bit: u8, phase_bit: u8) -> Result<Self> {
        if amplitude_bit > 1 || phase_bit > 1 {
            return Err(Error::Domain(format!(
                "Bell component bits must be 0 or 1, got ({amplitude_bit}, {phase_bit})"
            )));
        }
        Ok(Self { amplitude_bit, phase_bit })
    }

    /// Dense index 0..4 in the order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
    pub fn index(self) -> usize {
        (self.amplitude_bit as usize) * 2 + self.phase_bit as usize
    }

    fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }
}

impl std::fmt::Display for BellComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match (self.amplitude_bit, self.phase_bit) {
            (0, 0) => "Φ+",
            (0, 1) => "Φ-",
            (1, 0) => "Ψ+",
            _ => "Ψ-",
        };
        f.write_str(s)
    }
}

/// Pauli operator label used when reporting heralded corrections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Which party applies a heralded correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// A Bell-diagonal two-qubit mixture: probabilities over the four Bell
/// components, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct BellDiagonalState<S: Scalar> {
    p: [S; 4],
}

impl<S: Scalar> BellDiagonalState<S> {
    /// Build a state from probabilities in index order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
    ///
    /// Entries must lie in [0,1] and sum to 1 within `1e-12` (exactly, when
    /// the scalar type is rational).
    pub fn new(p: [S; 4]) -> Result<Self> {
        let mut sum = S::zero();
        for (i, w) in p.iter().enumerate() {
            let x = w.to_f64();
            if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&x) {
                return Err(Error::Domain(format!(
                    "component {} weight {} outside [0,1]",
                    BellComponent::from_index(i),
                    x
                )));
            }
            sum = sum + w.clone();
        }
        if (sum.to_f64() - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "weights sum to {}, expected 1",
                sum.to_f64()
            )));
        }
        if S::exact() && sum != S::one() {
            return Err(Error::Domain("exact weights must sum to exactly 1".into()));
        }
        Ok(Self { p })
    }

    /// Build from unnormalized non-negative weights.
    pub fn from_weights(w: [S; 4]) -> Result<Self> {
        let total = w.iter().cloned().fold(S::zero(), |a, b| a + b);
        if total.to_f64() <= 0.0 {
            return Err(Error::Domain("total weight must be positive".into()));
        }
        let p = w.map(|x| x / total.clone());
        Self::new(p)
    }

    /// Pure |Φ⁺⟩.
    pub fn phi_plus() -> Self {
        Self {
            p: [S::one(), S::zero(), S::zero(), S::zero()],
        }
    }

    /// Weight of one Bell component.
    pub fn weight(&self, c: BellComponent) -> S {
        self.p[c.index()].clone()
    }

    /// The four weights in index order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
    pub fn weights(&self) -> &[S; 4] {
        &self.p
    }

    /// Overlap with the target |Φ⁺⟩, i.e. the fidelity F.
    pub fn fidelity(&self) -> S {
        self.p[0].clone()
    }
}

/// Outcome of one (heralded) purification round.
#[derive(Clone, Debug, PartialEq)]
pub struct PurificationResult<S: Scalar> {
    /// Probability that the round is kept.
    pub success_prob: S,
    /// Output mixture conditioned on success.
    pub output: BellDiagonalState<S>,
    /// Heralded local corrections already folded into `output`; recorded so
    /// callers can reproduce the physical pulse sequence.
    pub corrections: Vec<(Party, Pauli)>,
}

/// The Werner state with fidelity `F`: weight F on Φ⁺ and (1−F)/3 on each
/// other component.
pub fn make_werner<S: Scalar>(f: S) -> Result<BellDiagonalState<S>> {
    let x = f.to_f64();
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("fidelity {x} outside [0,1]")));
    }
    let rest = (S::one() - f.clone()) / S::from_ratio(3, 1);
    BellDiagonalState::new([f, rest.clone(), rest.clone(), rest])
}

/// Twirl (Werner-ize): random bilateral rotations keep the Φ⁺ weight and
/// spread the rest evenly. Idempotent.
pub fn twirl<S: Scalar>(state: &BellDiagonalState<S>) -> BellDiagonalState<S> {
    make_werner(state.fidelity()).expect("fidelity of a valid state is in range")
}

/// The bilateral CNOT acting on (source, target) Bell components.
///
/// Phase information flows target → source and amplitude information flows
/// source → target:
/// source phase ⊕= target phase; target amplitude ⊕= source amplitude.
pub fn bilateral_cnot(src: BellComponent, tgt: BellComponent) -> (BellComponent, BellComponent) {
    (
        BellComponent {
            amplitude_bit: src.amplitude_bit,
            phase_bit: src.phase_bit ^ tgt.phase_bit,
        },
        BellComponent {
            amplitude_bit: src.amplitude_bit ^ tgt.amplitude_bit,
            phase_bit: tgt.phase_bit,
        },
    )
}

fn cnot_postselect_core<S: Scalar>(state: &BellDiagonalState<S>) -> PurificationResult<S> {
    let mut kept = [S::zero(), S::zero(), S::zero(), S::zero()];
    let mut success = S::zero();
    for src in BellComponent::ALL {
        for tgt in BellComponent::ALL {
            let (src_out, tgt_out) = bilateral_cnot(src, tgt);
            // Equal Z outcomes on the target pair occur exactly when the
            // target is Φ-type (correlated in the computational basis).
            if tgt_out.amplitude_bit == 0 {
                let w = state.weight(src) * state.weight(tgt);
                kept[src_out.index()] = kept[src_out.index()].clone() + w.clone();
                success = success + w;
            }
        }
    }
    let output = BellDiagonalState::from_weights(kept)
        .expect("success probability of the CNOT map is bounded below by Σp_i² > 0");
    PurificationResult {
        success_prob: success,
        output,
        corrections: Vec::new(),
    }
}

/// One round on two identical copies: bilateral CNOT, keep when the target
/// pair's Z measurements agree.
///
/// For Werner input with fidelity F the kept Φ⁺ weight is
/// [F² + (1−F)²/9] / N with N = F² + (2/3)F(1−F) + (5/9)(1−F)².
pub fn bbpssw_round<S: Scalar>(state: &BellDiagonalState<S>) -> Result<PurificationResult<S>> {
    Ok(cnot_postselect_core(state))
}

/// One round with the bilateral ±i rotations applied first.
///
/// The rotation |0⟩_A → (|0⟩−i|1⟩)/√2, |1⟩_A → (|1⟩−i|0⟩)/√2 on Alice's
/// qubits and its +i counterpart on Bob's permutes the Bell components as
/// Φ⁻ ↔ Ψ⁻ (Φ⁺ and Ψ⁺ are fixed up to global phase), after which the CNOT
/// round runs as in [`bbpssw_round`]. This makes the map effective on
/// arbitrary Bell-diagonal inputs, no twirling required.
pub fn dejmps_round<S: Scalar>(state: &BellDiagonalState<S>) -> Result<PurificationResult<S>> {
    let p = state.weights();
    let rotated = BellDiagonalState::new([
        p[0].clone(),
        p[3].clone(), // Ψ⁻ → Φ⁻
        p[2].clone(),
        p[1].clone(), // Φ⁻ → Ψ⁻
    ])?;
    Ok(cnot_postselect_core(&rotated))
}

/// The PBS parity-check round on a rank-2 mixture {Φ⁺: F, Ψ⁺: 1−F}.
///
/// Output fidelity F₁ = F²/(F² + (1−F)²), success probability
/// (F² + (1−F)²)/2. The "four-mode" postselection argument only removes the
/// Φ⁺⊗Ψ⁺ cross terms of this rank-2 form, so any support on Φ⁻ or Ψ⁻ is
/// rejected as unsupported.
///
/// On the −+/+− heralds a σ_z correction on Alice's photon is applied; it is
/// recorded in the result.
pub fn pan_pbs_round<S: Scalar>(state: &BellDiagonalState<S>) -> Result<PurificationResult<S>> {
    let off = state.weight(BellComponent::PHI_MINUS).to_f64().abs()
        + state.weight(BellComponent::PSI_MINUS).to_f64().abs();
    if off > NORM_TOL {
        return Err(Error::UnsupportedMixture(
            "PBS round requires support only on {Φ⁺, Ψ⁺}".into(),
        ));
    }
    let f = state.weight(BellComponent::PHI_PLUS);
    let g = state.weight(BellComponent::PSI_PLUS);
    let parity_pass = f.clone() * f.clone() + g.clone() * g.clone();
    let success = parity_pass.clone() / S::from_ratio(2, 1);
    let f1 = f.clone() * f / parity_pass.clone();
    let output = BellDiagonalState::new([
        f1.clone(),
        S::zero(),
        S::one() - f1,
        S::zero(),
    ])?;
    Ok(PurificationResult {
        success_prob: success,
        output,
        corrections: vec![(Party::Alice, Pauli::Z)],
    })
}

/// Iterate a round map `k` times, reporting the fidelity and cumulative
/// success probability after each successful round (the entry for zero
/// rounds is included first).
pub fn iterate_map<S, Op>(
    round_op: Op,
    state: &BellDiagonalState<S>,
    k: usize,
) -> Result<Vec<(S, S)>>
where
    S: Scalar,
    Op: Fn(&BellDiagonalState<S>) -> Result<PurificationResult<S>>,
{
    let mut trajectory = Vec::with_capacity(k + 1);
    let mut current = state.clone();
    let mut cumulative = S::one();
    trajectory.push((current.fidelity(), cumulative.clone()));
    for _ in 0..k {
        let result = round_op(&current)?;
        cumulative = cumulative * result.success_prob.clone();
        current = result.output;
        trajectory.push((current.fidelity(), cumulative.clone()));
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn werner_limits() {
        let s = make_werner(1.0).unwrap();
        assert_eq!(s.weights(), &[1.0, 0.0, 0.0, 0.0]);
        let u = make_werner(0.25).unwrap();
        assert_eq!(u.weights(), &[0.25, 0.25, 0.25, 0.25]);
        let w = make_werner(0.7f64).unwrap();
        assert!((w.weight(BellComponent::PHI_MINUS) - 0.1).abs() < NORM_TOL);
        assert!(make_werner(1.2).is_err());
    }

    #[test]
    fn twirl_fixed_point_and_idempotence() {
        let w = make_werner(0.7f64).unwrap();
        assert_eq!(twirl(&w), w);
        let s = BellDiagonalState::new([0.6, 0.3, 0.05, 0.05]).unwrap();
        let t = twirl(&s);
        assert!((t.weight(BellComponent::PHI_MINUS) - 0.4 / 3.0).abs() < NORM_TOL);
        assert_eq!(twirl(&t), t);
        assert_eq!(t.fidelity(), s.fidelity());
    }

    #[test]
    fn bbpssw_werner_closed_form_exact() {
        // F = 0.7: N = 0.68 and F' = (0.49 + 0.01)/0.68 = 25/34.
        let s = make_werner(r(7, 10)).unwrap();
        let out = bbpssw_round(&s).unwrap();
        assert_eq!(out.success_prob, r(17, 25));
        assert_eq!(out.output.fidelity(), r(25, 34));
    }

    #[test]
    fn bbpssw_fixed_points() {
        // The Werner recursion F ↦ [F² + (1−F)²/9]/N has fixed points at
        // exactly the roots of 8F³ − 14F² + 7F − 1 = (F−1)(8F²−6F+1):
        // F ∈ {1/4, 1/2, 1}. (F = 0 is not fixed; it maps to 1/5.)
        for f in [r(1, 4), r(1, 2), r(1, 1)] {
            let s = make_werner(f.clone()).unwrap();
            let out = bbpssw_round(&s).unwrap();
            assert_eq!(out.output.fidelity(), f);
        }
        let zero = make_werner(r(0, 1)).unwrap();
        let out = bbpssw_round(&zero).unwrap();
        assert_eq!(out.output.fidelity(), r(1, 5));
    }

    #[test]
    fn dejmps_rank2_example() {
        let s = BellDiagonalState::new([r(7, 10), r(3, 10), r(0, 1), r(0, 1)]).unwrap();
        let out = dejmps_round(&s).unwrap();
        assert_eq!(out.success_prob, r(58, 100));
        assert_eq!(out.output.fidelity(), r(49, 58));
    }

    #[test]
    fn dejmps_uniform_is_fixed() {
        let s = make_werner(0.25f64).unwrap();
        let out = dejmps_round(&s).unwrap();
        for c in BellComponent::ALL {
            assert!((out.output.weight(c) - 0.25).abs() < NORM_TOL);
        }
    }

    #[test]
    fn pan_pbs_closed_form() {
        let s = BellDiagonalState::new([r(3, 4), r(0, 1), r(1, 4), r(0, 1)]).unwrap();
        let out = pan_pbs_round(&s).unwrap();
        assert_eq!(out.output.fidelity(), r(9, 10));
        assert_eq!(out.success_prob, r(5, 16));
        assert_eq!(out.corrections, vec![(Party::Alice, Pauli::Z)]);
    }

    #[test]
    fn pan_pbs_rejects_phase_support() {
        let s = BellDiagonalState::new([0.7, 0.1, 0.1, 0.1]).unwrap();
        assert!(matches!(
            pan_pbs_round(&s),
            Err(Error::UnsupportedMixture(_))
        ));
    }

    #[test]
    fn iterate_monotone() {
        let s = BellDiagonalState::new([0.6f64, 0.0, 0.4, 0.0]).unwrap();
        let traj = iterate_map(pan_pbs_round, &s, 3).unwrap();
        assert_eq!(traj.len(), 4);
        for w in traj.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1 < w[0].1);
        }
        let traj0 = iterate_map(pan_pbs_round, &s, 0).unwrap();
        assert_eq!(traj0, vec![(0.6, 1.0)]);
    }

    #[test]
    fn component_bits() {
        assert_eq!(BellComponent::new(1, 0).unwrap(), BellComponent::PSI_PLUS);
        assert!(BellComponent::new(2, 0).is_err());
        assert_eq!(BellComponent::PSI_MINUS.index(), 3);
    }
}
