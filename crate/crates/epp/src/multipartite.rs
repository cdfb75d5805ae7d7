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

//! GHZ-state purification: the multilateral CNOT protocol, its QND
//! single-selection variant, and the two-step recycling protocol.
//!
//! An n-party GHZ basis state is labelled by an amplitude index k (the bit
//! pattern of parties 2..n in the representative ket whose first bit is 0)
//! and a phase bit s:
//!
//! |k, s⟩ = (|0, k⟩ + (−1)^s |1, k̄⟩)/√2.
//!
//! For three parties this is the familiar set of eight GHZ states; with
//! H ↦ 0, V ↦ 1 the four "+" states
//! (|HHH⟩+|VVV⟩)/√2, (|HHV⟩+|VVH⟩)/√2, (|HVH⟩+|VHV⟩)/√2, (|HVV⟩+|VHH⟩)/√2
//! carry k = 0, 1, 2, 3 respectively.
//!
//! All maps act on GHZ-diagonal mixtures and are exact over any [`Scalar`].

use std::collections::BTreeMap;

use crate::bell_core::{BellComponent, BellDiagonalState, NORM_TOL};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One GHZ basis state of an n-party system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GHZComponent {
    /// Amplitude index: bits of parties 2..n in the representative ket with
    /// first bit 0; ranges over 0..2^(n−1).
    pub k: usize,
    /// 0 for the + superposition, 1 for −.
    pub phase_bit: u8,
    /// Number of parties (n ≥ 2).
    pub n: usize,
}

impl GHZComponent {
    /// Construct a component, validating the index range.
    pub fn new(n: usize, k: usize, phase_bit: u8) -> Result<Self> {
        if n < 2 || n > usize::BITS as usize {
            return Err(Error::Domain(format!("party count {n} out of range")));
        }
        if k >= 1 << (n - 1) {
            return Err(Error::Domain(format!(
                "amplitude index {k} out of range for {n} parties"
            )));
        }
        if phase_bit > 1 {
            return Err(Error::Domain(format!("phase bit must be 0 or 1, got {phase_bit}")));
        }
        Ok(Self { k, phase_bit, n })
    }

    /// The n-party target state (|00…0⟩ + |11…1⟩)/√2.
    pub fn target(n: usize) -> Result<Self> {
        Self::new(n, 0, 0)
    }
}

impl std::fmt::Display for GHZComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.phase_bit == 0 { '+' } else { '-' };
        write!(f, "|{};{}{}⟩", self.n, self.k, sign)
    }
}

/// A GHZ-diagonal n-party mixture: probabilities over GHZ components,
/// summing to one. Zero-weight components are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct GHZDiagonalState<S: Scalar> {
    n: usize,
    p: BTreeMap<(usize, u8), S>,
}

impl<S: Scalar> GHZDiagonalState<S> {
    /// Build a state from (component, probability) pairs. All components
    /// must share the party count `n`; probabilities must lie in [0,1] and
    /// sum to 1 within `1e-12` (exactly, for rational scalars).
    pub fn new(n: usize, components: Vec<(GHZComponent, S)>) -> Result<Self> {
        let mut p = BTreeMap::new();
        let mut sum = S::zero();
        for (c, w) in components {
            if c.n != n {
                return Err(Error::Domain(format!(
                    "component {c} has {} parties, state has {n}",
                    c.n
                )));
            }
            let x = w.to_f64();
            if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&x) {
                return Err(Error::Domain(format!("component {c} weight {x} outside [0,1]")));
            }
            sum = sum + w.clone();
            if x > 0.0 {
                let slot = p.entry((c.k, c.phase_bit)).or_insert_with(S::zero);
                *slot = slot.clone() + w;
            }
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
        Ok(Self { n, p })
    }

    /// A pure GHZ basis state.
    pub fn pure(c: GHZComponent) -> Self {
        let mut p = BTreeMap::new();
        p.insert((c.k, c.phase_bit), S::one());
        Self { n: c.n, p }
    }

    /// Number of parties.
    pub fn parties(&self) -> usize {
        self.n
    }

    /// Weight of one component (zero if absent).
    pub fn weight(&self, c: &GHZComponent) -> S {
        if c.n != self.n {
            return S::zero();
        }
        self.p.get(&(c.k, c.phase_bit)).cloned().unwrap_or_else(S::zero)
    }

    /// Iterate over the stored (component, probability) pairs.
    pub fn components(&self) -> impl Iterator<Item = (GHZComponent, S)> + '_ {
        self.p.iter().map(move |(&(k, s), w)| {
            (GHZComponent { k, phase_bit: s, n: self.n }, w.clone())
        })
    }

    /// Overlap with the target (|00…0⟩ + |11…1⟩)/√2.
    pub fn fidelity(&self) -> S {
        self.p.get(&(0, 0)).cloned().unwrap_or_else(S::zero)
    }
}

/// Outcome of one heralded GHZ purification round.
#[derive(Clone, Debug, PartialEq)]
pub struct GhzPurificationResult<S: Scalar> {
    /// Probability that the round is kept.
    pub success_prob: S,
    /// Output mixture conditioned on success.
    pub output: GHZDiagonalState<S>,
}

/// Which error species a multilateral round targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhzErrorKind {
    /// Amplitude (bit-flip) errors: purify the k index directly.
    Bit,
    /// Phase errors: conjugate by local Hadamards so that the phase bit is
    /// checked by the same parity measurement.
    Phase,
}

/// Identifies which two of the three parties share a recycled Bell pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartyPair {
    AliceBob,
    AliceCharlie,
    BobCharlie,
}

/// The Bell pairs salvaged from the discarded branches of a two-copy GHZ
/// round, keyed by the surviving party pair. `weight` is the probability of
/// landing in that branch; `state` is the conditional Bell mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct RecycledPairs<S: Scalar> {
    pub pairs: BTreeMap<PartyPair, (S, BellDiagonalState<S>)>,
}

fn check_parties<S: Scalar>(state: &GHZDiagonalState<S>) -> Result<()> {
    if state.parties() < 3 {
        return Err(Error::Domain(format!(
            "multilateral purification needs at least 3 parties, got {}",
            state.parties()
        )));
    }
    Ok(())
}

/// One multilateral-CNOT purification round on two identical copies.
///
/// Each party applies a CNOT from its source-copy qubit to its target-copy
/// qubit and the target copy is measured in the computational basis. The
/// source copy is kept when every party reports the same outcome; the
/// surviving component is then |k₁, s₁⊕s₂⟩, so amplitude errors are filtered
/// and phase errors are compared. For [`GhzErrorKind::Phase`] the copies are
/// conjugated by local Hadamards first, which exchanges the roles of the two
/// labels: the round keeps s₁ = s₂ branches and leaves |k₁⊕k₂, s₁⟩.
pub fn mmepp_round<S: Scalar>(
    state: &GHZDiagonalState<S>,
    kind: GhzErrorKind,
) -> Result<GhzPurificationResult<S>> {
    check_parties(state)?;
    let n = state.parties();
    let mut kept: BTreeMap<(usize, u8), S> = BTreeMap::new();
    let mut success = S::zero();
    for (c1, p1) in state.components() {
        for (c2, p2) in state.components() {
            let out = match kind {
                GhzErrorKind::Bit if c1.k == c2.k => (c1.k, c1.phase_bit ^ c2.phase_bit),
                GhzErrorKind::Phase if c1.phase_bit == c2.phase_bit => (c1.k ^ c2.k, c1.phase_bit),
                _ => continue,
            };
            let w = p1.clone() * p2;
            let slot = kept.entry(out).or_insert_with(S::zero);
            *slot = slot.clone() + w.clone();
            success = success + w;
        }
    }
    if success.to_f64() <= 0.0 {
        return Err(Error::Domain("round succeeds with probability zero".into()));
    }
    let components = kept
        .into_iter()
        .map(|((k, s), w)| (GHZComponent { k, phase_bit: s, n }, w / success.clone()))
        .collect();
    Ok(GhzPurificationResult {
        success_prob: success,
        output: GHZDiagonalState::new(n, components)?,
    })
}

/// The single-selection QND variant of [`mmepp_round`].
///
/// Cross-phase-modulation parity checks replace the CNOT gates; the output
/// mixture is identical, but only the coherent-state phase-shift-θ branch is
/// kept, which halves the efficiency. Setting θ = π makes the two discarded
/// phase shifts indistinguishable from the kept one, so both branches
/// contribute and the success probability doubles back to the CNOT value.
pub fn smepp_round<S: Scalar>(
    state: &GHZDiagonalState<S>,
    kind: GhzErrorKind,
    theta_pi_mode: bool,
) -> Result<GhzPurificationResult<S>> {
    let mut round = mmepp_round(state, kind)?;
    if !theta_pi_mode {
        round.success_prob = round.success_prob / S::from_ratio(2, 1);
    }
    Ok(round)
}

/// The four positive-phase three-party amplitude indices, in the coefficient
/// order (F, F₀, F₂, F₃) of the recycling protocol's input mixture:
/// F on k=0 (HHH+VVV), F₀ on k=3 (HVV+VHH), F₂ on k=2 (HVH+VHV),
/// F₃ on k=1 (HHV+VVH).
const RECYCLE_ORDER: [usize; 4] = [0, 3, 2, 1];

fn rank4_plus_weights<S: Scalar>(state: &GHZDiagonalState<S>) -> Result<[S; 4]> {
    if state.parties() != 3 {
        return Err(Error::Domain(format!(
            "recycling step is defined for 3 parties, got {}",
            state.parties()
        )));
    }
    for (c, _) in state.components() {
        if c.phase_bit != 0 {
            return Err(Error::UnsupportedMixture(format!(
                "recycling step needs a positive-phase mixture, found {c}"
            )));
        }
    }
    Ok(RECYCLE_ORDER.map(|k| state.weight(&GHZComponent { k, phase_bit: 0, n: 3 })))
}

/// Party pair that survives a discarded branch whose two amplitude indices
/// differ by `g = k₁ ⊕ k₂` (bits of parties 2 and 3): the two parties whose
/// outcomes still agree keep a Bell pair.
fn recycled_party_pair(g: usize) -> PartyPair {
    match g {
        1 => PartyPair::AliceBob,
        2 => PartyPair::AliceCharlie,
        _ => PartyPair::BobCharlie,
    }
}

/// First step of the two-step recycling protocol on a rank-4 positive-phase
/// three-party mixture F, F₀, F₂, F₃ (on k = 0, 3, 2, 1).
///
/// The kept branch squares the coefficients: F′ = F²/N with
/// N = F² + F₀² + F₂² + F₃². Instead of being thrown away, each discarded
/// branch (k₁ ≠ k₂) collapses to a Bell pair between the two parties whose
/// measurement outcomes agree: branches containing the k = 0 component give
/// |Φ⁺⟩, the complementary ones give |Ψ⁺⟩, e.g.
/// ρ_{AC} ∝ 2FF₂ |Φ⁺⟩⟨Φ⁺| + 2F₀F₃ |Ψ⁺⟩⟨Ψ⁺|.
pub fn dmepp_step1<S: Scalar>(
    state: &GHZDiagonalState<S>,
) -> Result<(GhzPurificationResult<S>, RecycledPairs<S>)> {
    rank4_plus_weights(state)?;
    let round = mmepp_round(state, GhzErrorKind::Bit)?;

    let mut raw: BTreeMap<PartyPair, [S; 2]> = BTreeMap::new();
    for (c1, p1) in state.components() {
        for (c2, p2) in state.components() {
            if c1.k == c2.k {
                continue;
            }
            let pair = recycled_party_pair(c1.k ^ c2.k);
            // Branches through the k = 0 component keep the correlated
            // |Φ⁺⟩; the complementary pair of indices keeps |Ψ⁺⟩.
            let bell = if c1.k == 0 || c2.k == 0 { 0 } else { 1 };
            let slot = raw.entry(pair).or_insert([S::zero(), S::zero()]);
            slot[bell] = slot[bell].clone() + p1.clone() * p2;
        }
    }
    let mut pairs = BTreeMap::new();
    for (pair, [phi, psi]) in raw {
        let weight = phi.clone() + psi.clone();
        if weight.to_f64() <= 0.0 {
            continue;
        }
        let state = BellDiagonalState::from_weights([phi, S::zero(), psi, S::zero()])?;
        pairs.insert(pair, (weight, state));
    }
    Ok((round, RecycledPairs { pairs }))
}

/// Second step of the recycling protocol: fuse two recycled Bell pairs on
/// complementary party pairs back into a three-party GHZ mixture.
///
/// Each input must be a {Φ⁺, Ψ⁺} mixture (the form produced by
/// [`dmepp_step1`]). The step is deterministic — both parity outcomes are
/// kept up to a heralded flip — and multiplies the pair fidelities:
/// with Φ⁺ weights w₁, w₂ the output carries w₁w₂ on the target, so two
/// pairs of weight F/(F+F₀) give F″ = F²/(F+F₀)².
pub fn dmepp_step2<S: Scalar>(
    pair1: &BellDiagonalState<S>,
    pair2: &BellDiagonalState<S>,
) -> Result<GHZDiagonalState<S>> {
    for (i, p) in [pair1, pair2].into_iter().enumerate() {
        let off = p.weight(BellComponent::PHI_MINUS) + p.weight(BellComponent::PSI_MINUS);
        if off.to_f64() > NORM_TOL {
            return Err(Error::UnsupportedMixture(format!(
                "recycled pair {} must be a {{Φ⁺, Ψ⁺}} mixture",
                i + 1
            )));
        }
    }
    let w1 = pair1.weight(BellComponent::PHI_PLUS);
    let w2 = pair2.weight(BellComponent::PHI_PLUS);
    let v1 = pair1.weight(BellComponent::PSI_PLUS);
    let v2 = pair2.weight(BellComponent::PSI_PLUS);
    let c = |k: usize| GHZComponent { k, phase_bit: 0, n: 3 };
    GHZDiagonalState::new(
        3,
        vec![
            (c(0), w1.clone() * w2.clone()),
            (c(1), w1 * v2.clone()),
            (c(2), v1.clone() * w2),
            (c(3), v1 * v2),
        ],
    )
}

/// The four closed-form curves comparing the recycling protocol with the
/// conventional multilateral protocol on the symmetric mixture
/// F₀ = F₂ = F₃ = (1−F)/3.
#[derive(Clone, Debug, PartialEq)]
pub struct DmeppCurves<S: Scalar> {
    /// (1 − 2F + 4F²)/3 — the first-step (conventional) yield N.
    pub eff_a: S,
    /// (2 − F + 2F²)/3 — the yield including recycled pairs, (1 + N)/2.
    pub eff_b: S,
    /// 3F²/(1 − 2F + 4F²) — fidelity without recycling.
    pub fid_conv: S,
    /// 3F²(4 + 7F − 2F²)/((1 + 2F)²(2 − F + 2F²)) — average fidelity with
    /// the recycled output folded in.
    pub fid_dmepp: S,
}

/// Evaluate the efficiency/fidelity comparison curves at initial fidelity F.
///
/// The two efficiency formulas are exposed neutrally as `eff_a`/`eff_b`;
/// [`dmepp_yield_breakdown`] pins down which protocol each one belongs to by
/// explicit accounting (eff_a = kept probability of one two-copy round,
/// eff_b = the same plus half the discarded probability, since every
/// discarded branch leaves one Bell pair and two pairs rebuild one GHZ
/// state).
pub fn dmepp_curves<S: Scalar>(f: S) -> DmeppCurves<S> {
    let one = S::one;
    let r = S::from_ratio;
    let f2 = f.clone() * f.clone();
    let eff_a = (one() - r(2, 1) * f.clone() + r(4, 1) * f2.clone()) / r(3, 1);
    let eff_b = (r(2, 1) - f.clone() + r(2, 1) * f2.clone()) / r(3, 1);
    let fid_conv = r(3, 1) * f2.clone() / (one() - r(2, 1) * f.clone() + r(4, 1) * f2.clone());
    let one_2f = one() + r(2, 1) * f.clone();
    let fid_dmepp = r(3, 1) * f2.clone() * (r(4, 1) + r(7, 1) * f.clone() - r(2, 1) * f2.clone())
        / (one_2f.clone() * one_2f * (r(2, 1) - f.clone() + r(2, 1) * f2));
    DmeppCurves { eff_a, eff_b, fid_conv, fid_dmepp }
}

/// Two-copy accounting of the recycling protocol on the symmetric mixture,
/// used to attribute the two efficiency formulas.
///
/// Returns (kept probability N of step one, total discarded probability
/// 1 − N, GHZ yield per copy pair with recycling N + (1 − N)/2).
pub fn dmepp_yield_breakdown<S: Scalar>(f: S) -> Result<(S, S, S)> {
    let rest = (S::one() - f.clone()) / S::from_ratio(3, 1);
    let c = |k: usize| GHZComponent { k, phase_bit: 0, n: 3 };
    let state = GHZDiagonalState::new(
        3,
        vec![(c(0), f), (c(3), rest.clone()), (c(2), rest.clone()), (c(1), rest)],
    )?;
    let (round, recycled) = dmepp_step1(&state)?;
    let discarded = recycled
        .pairs
        .values()
        .fold(S::zero(), |acc, (w, _)| acc + w.clone());
    let total = round.success_prob.clone() + discarded.clone() / S::from_ratio(2, 1);
    Ok((round.success_prob, discarded, total))
}
