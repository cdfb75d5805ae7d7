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

//! Declarative protocol descriptions and the simulation loop.
//!
//! A [`ProtocolSpec`] lists photon-pair sources, a staged circuit
//! (element layers, probabilistic noise, detection-pattern selection,
//! ±-basis pair measurements) and the designated output pair.  Mixtures are
//! represented as weighted lists of pure branches — every error model in
//! scope is branch-diagonal — and the contribution of a branch to any event
//! probability is `weight · ‖projected state‖²`, so branch states never need
//! irrational renormalization.
//!
//! [`run_protocol`] aggregates all branches into a Bell-diagonal output
//! mixture on the designated pair together with the success probability
//! (conditioned on the source emission record: the squared norms of the
//! initial branches form the denominator).

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bell_core::{BellDiagonalState, PurificationResult};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::amplitude::Amplitude;
use super::elements::{apply_elements, OpticalElement};
use super::state::{ModeLabel, OccupationKey, OpticalState, Polarization};

/// Exact rational parameter in a serializable protocol description.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Rational {
    /// Numerator.
    pub num: i64,
    /// Denominator (positive).
    pub den: i64,
}

impl Rational {
    /// `num/den`, reduced.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()).max(1) as i64;
        n /= g;
        d /= g;
        Rational { num: n, den: d }
    }

    /// Zero.
    pub fn zero() -> Self {
        Rational::new(0, 1)
    }

    /// One.
    pub fn one() -> Self {
        Rational::new(1, 1)
    }

    /// Closest small-denominator rational to `x` (used to lift grid points
    /// from the CLI into exact protocol parameters).
    pub fn approx_f64(x: f64) -> Self {
        let r = num_rational::Ratio::<i64>::approximate_float(x)
            .unwrap_or_else(|| num_rational::Ratio::new(0, 1));
        Rational::new(*r.numer(), *r.denom())
    }

    /// Embeds into the scalar field.
    pub fn to_scalar<S: Scalar>(&self) -> S {
        S::from_ratio(self.num, self.den)
    }

    /// Embeds into an amplitude type.
    pub fn to_amp<A: Amplitude>(&self) -> A {
        A::from_ratio(self.num, self.den)
    }

    /// Product.
    pub fn times(&self, other: &Rational) -> Rational {
        Rational::new(self.num * other.num, self.den * other.den)
    }

    /// 1 − self.
    pub fn complement(&self) -> Rational {
        Rational::new(self.den - self.num, self.den)
    }

    /// Approximate value.
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A photon-pair (or resource) source with its branch-diagonal error model.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum SourceSpec {
    /// Ideal single-pair source emitting a Bell-diagonal polarization
    /// mixture on two paths; `weights` follow the Bell order
    /// [Φ⁺, Φ⁻, Ψ⁺, Ψ⁻] and must sum to 1.
    IdealPair {
        /// Alice's path.
        alice: String,
        /// Bob's path.
        bob: String,
        /// Bell-diagonal weights [Φ⁺, Φ⁻, Ψ⁺, Ψ⁻].
        weights: [Rational; 4],
    },
    /// SPDC source truncated at second order with a bit-flip channel:
    /// branch F carries |vac⟩ + √(p/2)(|HH⟩+|VV⟩) +
    /// (p/4)(|2H,2H⟩+|HV,HV⟩+|2V,2V⟩) and branch 1−F its bit-flipped
    /// (|Ψ⁺⟩-chain) counterpart.
    ///
    /// The second-order Fock amplitudes are pinned at half the
    /// single-single value, the unique weighting that reproduces the
    /// published double-pair-limited fidelity (3/4 → 13/14) exactly.
    SpdcPair {
        /// Alice's path.
        alice: String,
        /// Bob's path.
        bob: String,
        /// Pump amplitude √p (rational so exact runs stay exact).
        sqrt_p: Rational,
        /// Bit-flip probability 1 − F of the distribution channel.
        bitflip_prob: Rational,
    },
    /// Single photon pair hyperentangled in polarization and spatial mode,
    /// with independent Bell-diagonal mixtures in the two degrees of
    /// freedom.
    HyperPair {
        /// Alice's two spatial paths (upper, lower).
        alice_paths: [String; 2],
        /// Bob's two spatial paths (upper, lower).
        bob_paths: [String; 2],
        /// Polarization weights [Φ⁺, Φ⁻, Ψ⁺, Ψ⁻].
        pol_weights: [Rational; 4],
        /// Spatial-mode weights [Φ⁺, Φ⁻, Ψ⁺, Ψ⁻] over the path pairs.
        spatial_weights: [Rational; 4],
    },
    /// Four-photon (second-order) emission of a spatially-multiplexed SPDC
    /// source, (Σ_m η_m â†_m b̂†_m)²|0⟩, with independent per-pair bit-flip
    /// branches.  `eta`/`omega_quarter_turns` set the relative amplitude
    /// η·i^ω of the second path pair.
    SpdcHyperFourPhoton {
        /// Alice's two spatial paths.
        alice_paths: [String; 2],
        /// Bob's two spatial paths.
        bob_paths: [String; 2],
        /// Per-pair bit-flip probability 1 − F.
        bitflip_prob: Rational,
        /// Path asymmetry η.
        eta: Rational,
        /// Relative pump phase ω in 90° units.
        omega_quarter_turns: u8,
    },
    /// Verbatim branch list; kets are creation-operator monomials applied to
    /// |vac⟩ (bosonic √n! factors are folded in automatically).
    Raw {
        /// Mixture branches.
        branches: Vec<RawBranch>,
    },
}

/// One pure branch of a [`SourceSpec::Raw`] source.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RawBranch {
    /// Branch probability weight.
    pub weight: Rational,
    /// Superposed kets of the branch state.
    pub kets: Vec<RawKet>,
}

/// One ket of a raw branch: coefficient `ratio·√2^sqrt2_pow` times the
/// creation monomial over `slots`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RawKet {
    /// Rational part of the coefficient.
    pub ratio: Rational,
    /// Power of √2 in the coefficient (may be negative).
    pub sqrt2_pow: i8,
    /// (path, polarization, count) creation monomial.
    pub slots: Vec<(String, Polarization, u8)>,
}

/// Constraint on an occupation key used by selection stages.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum PatternAtom {
    /// Exact photon count in one (path, polarization) slot.
    SlotExact {
        /// Path name.
        mode: String,
        /// Polarization.
        polarization: Polarization,
        /// Required count.
        count: u8,
    },
    /// Exact total photon count over both polarizations of a path.
    ModeTotal {
        /// Path name.
        mode: String,
        /// Required total.
        count: u8,
    },
}

impl PatternAtom {
    fn matches(&self, key: &OccupationKey) -> bool {
        match self {
            PatternAtom::SlotExact {
                mode,
                polarization,
                count,
            } => key.count(&ModeLabel::new(mode.clone(), *polarization)) == *count,
            PatternAtom::ModeTotal { mode, count } => key.mode_total(mode) == *count,
        }
    }
}

/// Total predicate over occupation keys (conjunction of atoms; the empty
/// rule accepts everything).
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct PostselectionRule {
    /// Conjunctive constraints.
    pub atoms: Vec<PatternAtom>,
}

impl PostselectionRule {
    /// The “four mode” rule: exactly one photon in each listed path.
    pub fn one_photon_each(modes: &[&str]) -> Self {
        PostselectionRule {
            atoms: modes
                .iter()
                .map(|m| PatternAtom::ModeTotal {
                    mode: (*m).to_string(),
                    count: 1,
                })
                .collect(),
        }
    }

    /// True if the key satisfies every atom.
    pub fn matches(&self, key: &OccupationKey) -> bool {
        self.atoms.iter().all(|a| a.matches(key))
    }
}

/// One accepted detection class of a [`Stage::Select`].
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Arm {
    /// Conjunctive detection pattern.
    pub pattern: Vec<PatternAtom>,
    /// Remove the photons named by `SlotExact` atoms (detector absorption).
    pub remove_matched: bool,
    /// Conditional elements applied after the match (routing, Pauli fix-ups
    /// realized optically).
    pub then: Vec<OpticalElement>,
}

/// One step of a protocol.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum Stage {
    /// Unconditional element layer.
    Elements(Vec<OpticalElement>),
    /// Probabilistic error: with `probability`, the listed elements are
    /// applied (branch split; e.g. a bit flip is an HWP).
    Noise {
        /// Probability of the error branch.
        probability: Rational,
        /// Elements realizing the error.
        elements: Vec<OpticalElement>,
    },
    /// Detection-pattern selection.  Every key is routed to the first arm it
    /// matches; keys matching no arm are discarded (failure).  Each arm
    /// becomes its own incoherent branch.
    Select {
        /// Accepted detection classes.
        arms: Vec<Arm>,
    },
    /// Measures one photon in each of two paths in the {|+⟩, |−⟩} basis,
    /// removing them; anti-correlated outcomes apply σ_z to the
    /// `z_correction_mode` path (the standard parity fix-up).
    MeasurePairPm {
        /// The two measured paths.
        modes: [String; 2],
        /// Path receiving the conditional σ_z.
        z_correction_mode: String,
    },
}

/// Designated output of a protocol.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum OutputSpec {
    /// One polarization-encoded pair, reported in the Bell basis.
    BellPair {
        /// Alice's output path.
        alice: String,
        /// Bob's output path.
        bob: String,
    },
}

/// Complete declarative description of an optical purification protocol.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ProtocolSpec {
    /// Maximum total photon number any branch may hold.
    pub truncation: u32,
    /// Photon sources (tensored together).
    pub sources: Vec<SourceSpec>,
    /// Ordered stages.
    pub stages: Vec<Stage>,
    /// Output designation.
    pub output: OutputSpec,
}

/// A weighted pure branch of the simulated mixture.
#[derive(Clone, Debug)]
pub struct Branch<A: Amplitude> {
    /// Probability weight of the branch (its state is *not* normalized; the
    /// branch contributes `weight · ‖P|ψ⟩‖²` to any event probability).
    pub weight: A::Real,
    /// Pure state of the branch.
    pub state: OpticalState<A>,
}

fn bell_pair_kets(index: usize) -> [(Polarization, Polarization, bool); 2] {
    // (Alice pol, Bob pol, negated) for the two kets of Bell state `index`
    // in the order [Φ⁺, Φ⁻, Ψ⁺, Ψ⁻].
    let phase = index % 2 == 1;
    if index < 2 {
        [
            (Polarization::H, Polarization::H, false),
            (Polarization::V, Polarization::V, phase),
        ]
    } else {
        [
            (Polarization::H, Polarization::V, false),
            (Polarization::V, Polarization::H, phase),
        ]
    }
}

fn pair_state<A: Amplitude>(
    alice: &str,
    bob: &str,
    index: usize,
    truncation: u32,
) -> Result<OpticalState<A>> {
    let mut s = OpticalState::empty(truncation);
    for (pa, pb, negated) in bell_pair_kets(index) {
        let mut amp = A::one().div_sqrt(2)?;
        if negated {
            amp = -amp;
        }
        s.accumulate(
            OccupationKey::from_slots([(alice.to_string(), pa, 1), (bob.to_string(), pb, 1)]),
            amp,
        )?;
    }
    Ok(s)
}

/// Branch expansion of the SPDC pair source of the experiments:
/// {(F, |Φ⁺⟩-chain), (1−F, |Ψ⁺⟩-chain)} with the chains truncated at second
/// order in √p (see [`SourceSpec::SpdcPair`] for the pinned second-order
/// weighting).
pub fn spdc_pair_source<A: Amplitude>(
    alice: &str,
    bob: &str,
    sqrt_p: &Rational,
    bitflip_prob: &Rational,
    truncation: u32,
) -> Result<Vec<Branch<A>>> {
    let p = sqrt_p.times(sqrt_p);
    let chain = |flip: bool| -> Result<OpticalState<A>> {
        let mut s = OpticalState::empty(truncation);
        // Zeroth order: vacuum.
        s.accumulate(OccupationKey::vacuum(), A::one())?;
        // First order: √(p/2)(|H,H⊕f⟩ + |V,V⊕f⟩).
        for pol in [Polarization::H, Polarization::V] {
            let bp = if flip { pol.flipped() } else { pol };
            s.accumulate(
                OccupationKey::from_slots([
                    (alice.to_string(), pol, 1),
                    (bob.to_string(), bp, 1),
                ]),
                sqrt_p.to_amp::<A>().div_sqrt(2)?,
            )?;
        }
        // Second order, Fock amplitude p/4 on each component.
        let quarter = p.to_amp::<A>() * A::from_ratio(1, 4);
        for (na, nb) in [
            (Polarization::H, Polarization::H),
            (Polarization::V, Polarization::V),
        ] {
            let nb = if flip { nb.flipped() } else { nb };
            s.accumulate(
                OccupationKey::from_slots([
                    (alice.to_string(), na, 2),
                    (bob.to_string(), nb, 2),
                ]),
                quarter.clone(),
            )?;
        }
        s.accumulate(
            OccupationKey::from_slots([
                (alice.to_string(), Polarization::H, 1),
                (alice.to_string(), Polarization::V, 1),
                (bob.to_string(), Polarization::H, 1),
                (bob.to_string(), Polarization::V, 1),
            ]),
            quarter,
        )?;
        Ok(s)
    };
    let f = bitflip_prob.complement();
    Ok(vec![
        Branch {
            weight: f.to_scalar(),
            state: chain(false)?,
        },
        Branch {
            weight: bitflip_prob.to_scalar(),
            state: chain(true)?,
        },
    ])
}

fn source_branches<A: Amplitude>(
    src: &SourceSpec,
    truncation: u32,
) -> Result<Vec<Branch<A>>> {
    match src {
        SourceSpec::IdealPair {
            alice,
            bob,
            weights,
        } => {
            let mut out = Vec::new();
            for (i, w) in weights.iter().enumerate() {
                if w.num == 0 {
                    continue;
                }
                out.push(Branch {
                    weight: w.to_scalar(),
                    state: pair_state(alice, bob, i, truncation)?,
                });
            }
            Ok(out)
        }
        SourceSpec::SpdcPair {
            alice,
            bob,
            sqrt_p,
            bitflip_prob,
        } => spdc_pair_source(alice, bob, sqrt_p, bitflip_prob, truncation),
        SourceSpec::HyperPair {
            alice_paths,
            bob_paths,
            pol_weights,
            spatial_weights,
        } => {
            let mut out = Vec::new();
            for (i, wp) in pol_weights.iter().enumerate() {
                for (j, ws) in spatial_weights.iter().enumerate() {
                    if wp.num == 0 || ws.num == 0 {
                        continue;
                    }
                    let mut s = OpticalState::empty(truncation);
                    for (sa, sb, sneg) in bell_pair_kets(j) {
                        // Spatial “polarizations” index the path pair:
                        // H ↦ upper path, V ↦ lower path.
                        let pa = &alice_paths[usize::from(sa == Polarization::V)];
                        let pb = &bob_paths[usize::from(sb == Polarization::V)];
                        for (qa, qb, pneg) in bell_pair_kets(i) {
                            let mut amp = A::from_ratio(1, 2);
                            if sneg != pneg {
                                amp = -amp;
                            }
                            s.accumulate(
                                OccupationKey::from_slots([
                                    (pa.clone(), qa, 1),
                                    (pb.clone(), qb, 1),
                                ]),
                                amp,
                            )?;
                        }
                    }
                    out.push(Branch {
                        weight: wp.times(ws).to_scalar(),
                        state: s,
                    });
                }
            }
            Ok(out)
        }
        SourceSpec::SpdcHyperFourPhoton {
            alice_paths,
            bob_paths,
            bitflip_prob,
            eta,
            omega_quarter_turns,
        } => {
            let f = bitflip_prob.complement();
            let mut out = Vec::new();
            for flips in [(false, false), (false, true), (true, false), (true, true)] {
                let w1 = if flips.0 { bitflip_prob } else { &f };
                let w2 = if flips.1 { bitflip_prob } else { &f };
                let mut s = OpticalState::empty(truncation);
                // (Σ_m η_m Σ_P â†_{a_m,P} b̂†_{b_m,P⊕flip})² |0⟩, expanded
                // term by term as creation monomials.
                let pair_terms = |flip: bool| -> Vec<(usize, Polarization)> {
                    let _ = flip;
                    vec![
                        (0, Polarization::H),
                        (0, Polarization::V),
                        (1, Polarization::H),
                        (1, Polarization::V),
                    ]
                };
                for (m1, p1) in pair_terms(flips.0) {
                    for (m2, p2) in pair_terms(flips.1) {
                        let mut coeff = A::one();
                        for m in [m1, m2] {
                            if m == 1 {
                                coeff = coeff * eta.to_amp::<A>();
                                for _ in 0..(*omega_quarter_turns % 4) {
                                    coeff = coeff.times_i();
                                }
                            }
                        }
                        let b1 = if flips.0 { p1.flipped() } else { p1 };
                        let b2 = if flips.1 { p2.flipped() } else { p2 };
                        s.accumulate_monomial(
                            &[
                                (ModeLabel::new(alice_paths[m1].clone(), p1), 1),
                                (ModeLabel::new(bob_paths[m1].clone(), b1), 1),
                                (ModeLabel::new(alice_paths[m2].clone(), p2), 1),
                                (ModeLabel::new(bob_paths[m2].clone(), b2), 1),
                            ],
                            coeff,
                        )?;
                    }
                }
                out.push(Branch {
                    weight: w1.times(w2).to_scalar(),
                    state: s,
                });
            }
            Ok(out)
        }
        SourceSpec::Raw { branches } => {
            let mut out = Vec::new();
            for b in branches {
                let mut s = OpticalState::empty(truncation);
                for ket in &b.kets {
                    let mut amp: A = ket.ratio.to_amp();
                    let pow = ket.sqrt2_pow;
                    for _ in 0..pow.abs() {
                        amp = if pow > 0 {
                            amp.mul_sqrt(2)?
                        } else {
                            amp.div_sqrt(2)?
                        };
                    }
                    let slots: Vec<(ModeLabel, u8)> = ket
                        .slots
                        .iter()
                        .map(|(m, p, n)| (ModeLabel::new(m.clone(), *p), *n))
                        .collect();
                    s.accumulate_monomial(&slots, amp)?;
                }
                out.push(Branch {
                    weight: b.weight.to_scalar(),
                    state: s,
                });
            }
            Ok(out)
        }
    }
}

impl SourceSpec {
    /// Paths this source emits into.
    pub fn paths(&self) -> Vec<&str> {
        match self {
            SourceSpec::IdealPair { alice, bob, .. }
            | SourceSpec::SpdcPair { alice, bob, .. } => vec![alice, bob],
            SourceSpec::HyperPair {
                alice_paths,
                bob_paths,
                ..
            }
            | SourceSpec::SpdcHyperFourPhoton {
                alice_paths,
                bob_paths,
                ..
            } => alice_paths
                .iter()
                .chain(bob_paths.iter())
                .map(|s| s.as_str())
                .collect(),
            SourceSpec::Raw { branches } => {
                let mut v: Vec<&str> = branches
                    .iter()
                    .flat_map(|b| &b.kets)
                    .flat_map(|k| &k.slots)
                    .map(|(m, _, _)| m.as_str())
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

/// Keeps the components satisfying `rule`.
///
/// Returns the squared norm of the kept component (the selection probability
/// when the input is normalized) and the *unnormalized* conditioned state,
/// so that exact runs stay inside the rational ring.
pub fn postselect<A: Amplitude>(
    state: &OpticalState<A>,
    rule: &PostselectionRule,
) -> Result<(A::Real, OpticalState<A>)> {
    let mut kept = state.clone();
    kept.retain_filter(|k| rule.matches(k));
    let p = kept.norm_sqr().into_real()?;
    Ok((p, kept))
}

/// Measurement basis of [`measure_polarization`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum MeasurementBasis {
    /// Computational {|H⟩, |V⟩}.
    Hv,
    /// Diagonal {|+⟩, |−⟩}.
    Pm,
}

/// One outcome of a polarization measurement.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome<A: Amplitude> {
    /// Outcome per measured path: `false` = first basis vector (H or +),
    /// `true` = second (V or −).
    pub outcomes: Vec<bool>,
    /// Outcome probability (for a normalized input state).
    pub probability: A::Real,
    /// Conditioned, unnormalized state with the measured photons removed.
    pub state: OpticalState<A>,
}

/// Measures exactly one photon in each listed path.
///
/// Fails with a domain error if any component of the state does not hold
/// exactly one photon in each measured path.
pub fn measure_polarization<A: Amplitude>(
    state: &OpticalState<A>,
    modes: &[String],
    basis: MeasurementBasis,
) -> Result<Vec<MeasurementOutcome<A>>> {
    for (key, _) in state.components() {
        for m in modes {
            if key.mode_total(m) != 1 {
                return Err(Error::Domain(format!(
                    "measurement expects exactly one photon in path {m}, found {} in {key}",
                    key.mode_total(m)
                )));
            }
        }
    }
    let n = modes.len();
    let mut results = Vec::new();
    for mask in 0..(1u32 << n) {
        let outcomes: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let mut cond = OpticalState::<A>::empty(state.truncation());
        for (key, amp) in state.components() {
            let mut a = amp.clone();
            let mut k = key.clone();
            let mut dead = false;
            for (m, second) in modes.iter().zip(&outcomes) {
                let pol = if k.count(&ModeLabel::new(m.clone(), Polarization::H)) == 1 {
                    Polarization::H
                } else {
                    Polarization::V
                };
                match basis {
                    MeasurementBasis::Hv => {
                        let want = if *second {
                            Polarization::V
                        } else {
                            Polarization::H
                        };
                        if pol != want {
                            dead = true;
                            break;
                        }
                    }
                    MeasurementBasis::Pm => {
                        // ⟨±|H⟩ = 1/√2, ⟨±|V⟩ = ±1/√2.
                        a = a.div_sqrt(2)?;
                        if *second && pol == Polarization::V {
                            a = -a;
                        }
                    }
                }
                k.remove(&ModeLabel::new(m.clone(), pol), 1)?;
            }
            if !dead {
                cond.accumulate(k, a)?;
            }
        }
        cond.prune();
        results.push(MeasurementOutcome {
            outcomes,
            probability: cond.norm_sqr().into_real()?,
            state: cond,
        });
    }
    Ok(results)
}

/// Bell-swap selection: conditions on a photodetection coincidence
/// (exactly one photon of the stated polarization, and none of the other,
/// in each listed path), absorbing the detected photons.
///
/// Returns the coincidence probability (squared norm for normalized input)
/// and the conditioned, unnormalized remainder state.
pub fn entanglement_swap_stage<A: Amplitude>(
    state: &OpticalState<A>,
    detectors: &[(String, Polarization)],
) -> Result<(A::Real, OpticalState<A>)> {
    let mut kept = state.clone();
    kept.retain_filter(|k| {
        detectors.iter().all(|(m, p)| {
            k.count(&ModeLabel::new(m.clone(), *p)) == 1
                && k.count(&ModeLabel::new(m.clone(), p.flipped())) == 0
        })
    });
    let p = kept.norm_sqr().into_real()?;
    let absorbed = kept.flat_map(|key, amp, out| {
        let mut k = key.clone();
        for (m, pol) in detectors {
            k.remove(&ModeLabel::new(m.clone(), *pol), 1)?;
        }
        out.accumulate(k, amp.clone())
    })?;
    Ok((p, absorbed))
}

fn validate(spec: &ProtocolSpec) -> Result<()> {
    use std::collections::BTreeSet;
    let mut known: BTreeSet<String> = BTreeSet::new();
    for s in &spec.sources {
        for p in s.paths() {
            known.insert(p.to_string());
        }
    }
    let check_elements = |elements: &[OpticalElement],
                              known: &mut BTreeSet<String>|
     -> Result<()> {
        for e in elements {
            if let OpticalElement::Swap { a, b } = e {
                // A swap may rename into a fresh path.
                if !known.contains(a) && !known.contains(b) {
                    return Err(Error::Config(format!(
                        "swap references unknown paths {a}, {b}"
                    )));
                }
            } else {
                for m in e.input_paths() {
                    if !known.contains(m) {
                        return Err(Error::Config(format!(
                            "element reads unknown path {m}"
                        )));
                    }
                }
            }
            for m in e.output_paths() {
                known.insert(m.to_string());
            }
        }
        Ok(())
    };
    for stage in &spec.stages {
        match stage {
            Stage::Elements(es) | Stage::Noise { elements: es, .. } => {
                check_elements(es, &mut known)?
            }
            Stage::Select { arms } => {
                for arm in arms {
                    for atom in &arm.pattern {
                        let m = match atom {
                            PatternAtom::SlotExact { mode, .. }
                            | PatternAtom::ModeTotal { mode, .. } => mode,
                        };
                        if !known.contains(m) {
                            return Err(Error::Config(format!(
                                "selection references unknown path {m}"
                            )));
                        }
                    }
                    check_elements(&arm.then, &mut known)?;
                }
            }
            Stage::MeasurePairPm {
                modes,
                z_correction_mode,
            } => {
                for m in modes.iter().chain(std::iter::once(z_correction_mode)) {
                    if !known.contains(m) {
                        return Err(Error::Config(format!(
                            "measurement references unknown path {m}"
                        )));
                    }
                }
            }
        }
    }
    let OutputSpec::BellPair { alice, bob } = &spec.output;
    for m in [alice, bob] {
        if !known.contains(m) {
            return Err(Error::Config(format!("output references unknown path {m}")));
        }
    }
    Ok(())
}

fn apply_select<A: Amplitude>(branch: &Branch<A>, arms: &[Arm]) -> Result<Vec<Branch<A>>> {
    let mut out = Vec::new();
    for (i, arm) in arms.iter().enumerate() {
        let earlier = &arms[..i];
        let mut kept = branch.state.clone();
        kept.retain_filter(|k| {
            arm.pattern.iter().all(|a| a.matches(k))
                && !earlier
                    .iter()
                    .any(|e| e.pattern.iter().all(|a| a.matches(k)))
        });
        if kept.is_empty() {
            continue;
        }
        let mut state = if arm.remove_matched {
            kept.flat_map(|key, amp, out| {
                let mut k = key.clone();
                for atom in &arm.pattern {
                    if let PatternAtom::SlotExact {
                        mode,
                        polarization,
                        count,
                    } = atom
                    {
                        k.remove(&ModeLabel::new(mode.clone(), *polarization), *count)?;
                    }
                }
                out.accumulate(k, amp.clone())
            })?
        } else {
            kept
        };
        state = apply_elements(&state, &arm.then)?;
        state.prune();
        if !state.is_empty() {
            out.push(Branch {
                weight: branch.weight.clone(),
                state,
            });
        }
    }
    Ok(out)
}

fn apply_measure_pm<A: Amplitude>(
    branch: &Branch<A>,
    modes: &[String; 2],
    z_mode: &str,
) -> Result<Vec<Branch<A>>> {
    let sigma_z = OpticalElement::Phase {
        mode: z_mode.to_string(),
        polarization: Some(Polarization::V),
        quarter_turns: 2,
    };
    let mut out = Vec::new();
    for mask in 0..4u8 {
        let signs = [mask & 1 == 1, mask & 2 == 2];
        let mut cond = OpticalState::<A>::empty(branch.state.truncation());
        for (key, amp) in branch.state.components() {
            // Keys without exactly one photon per measured path belong to a
            // different detection signature and are dropped here (they were
            // already excluded by the preceding selection in every preset).
            if modes.iter().any(|m| key.mode_total(m) != 1) {
                continue;
            }
            let mut a = amp.clone();
            let mut k = key.clone();
            for (m, minus) in modes.iter().zip(&signs) {
                let pol = if k.count(&ModeLabel::new(m.clone(), Polarization::H)) == 1 {
                    Polarization::H
                } else {
                    Polarization::V
                };
                a = a.div_sqrt(2)?;
                if *minus && pol == Polarization::V {
                    a = -a;
                }
                k.remove(&ModeLabel::new(m.clone(), pol), 1)?;
            }
            cond.accumulate(k, a)?;
        }
        cond.prune();
        if cond.is_empty() {
            continue;
        }
        let state = if signs[0] != signs[1] {
            apply_elements(&cond, std::slice::from_ref(&sigma_z))?
        } else {
            cond
        };
        out.push(Branch {
            weight: branch.weight.clone(),
            state,
        });
    }
    Ok(out)
}

/// Runs a protocol end to end.
///
/// The success probability is conditioned on the sources' combined emission
/// record: the denominator is Σ weight·‖ψ₀‖² over the initial branches
/// (equal to 1 for normalized sources; for SPDC expansions this reproduces
/// per-pulse probabilities).  The output is the Bell-diagonal mixture on the
/// designated pair.  Any accepted amplitude outside the one-photon-per-side
/// Bell span is a modelling error and is reported as such.
pub fn run_protocol<A: Amplitude>(spec: &ProtocolSpec) -> Result<PurificationResult<A::Real>> {
    validate(spec)?;

    // Tensor the sources' branch lists.
    let mut branches: Vec<Branch<A>> = vec![Branch {
        weight: A::Real::one(),
        state: OpticalState::vacuum(spec.truncation),
    }];
    for src in &spec.sources {
        let parts = source_branches::<A>(src, spec.truncation)?;
        let mut next = Vec::with_capacity(branches.len() * parts.len());
        for b in &branches {
            for p in &parts {
                next.push(Branch {
                    weight: b.weight.clone() * p.weight.clone(),
                    state: b.state.tensor(&p.state)?,
                });
            }
        }
        branches = next;
    }

    // Denominator: total weight of the initial mixture.
    let mut total = A::zero();
    for b in &branches {
        total = total + A::from_real(b.weight.clone()) * b.state.norm_sqr();
    }
    let total = total.into_real()?;
    if total <= A::Real::zero() {
        return Err(Error::Domain("initial mixture has zero weight".into()));
    }

    // Stages.
    for stage in &spec.stages {
        let mut next = Vec::new();
        for b in &branches {
            match stage {
                Stage::Elements(es) => next.push(Branch {
                    weight: b.weight.clone(),
                    state: apply_elements(&b.state, es)?,
                }),
                Stage::Noise {
                    probability,
                    elements,
                } => {
                    let q: A::Real = probability.to_scalar();
                    let keep = A::Real::one() - q.clone();
                    if keep != A::Real::zero() {
                        next.push(Branch {
                            weight: b.weight.clone() * keep,
                            state: b.state.clone(),
                        });
                    }
                    if q != A::Real::zero() {
                        next.push(Branch {
                            weight: b.weight.clone() * q,
                            state: apply_elements(&b.state, elements)?,
                        });
                    }
                }
                Stage::Select { arms } => next.extend(apply_select(b, arms)?),
                Stage::MeasurePairPm {
                    modes,
                    z_correction_mode,
                } => next.extend(apply_measure_pm(b, modes, z_correction_mode)?),
            }
        }
        branches = next;
    }

    // Bell decomposition of the designated output pair.
    let OutputSpec::BellPair { alice, bob } = &spec.output;
    let key_of = |pa: Polarization, pb: Polarization| {
        OccupationKey::from_slots([(alice.clone(), pa, 1), (bob.clone(), pb, 1)])
    };
    let keys = [
        key_of(Polarization::H, Polarization::H),
        key_of(Polarization::V, Polarization::V),
        key_of(Polarization::H, Polarization::V),
        key_of(Polarization::V, Polarization::H),
    ];
    let mut p = [A::zero(), A::zero(), A::zero(), A::zero()];
    let mut residual = A::zero();
    for b in &branches {
        let w = A::from_real(b.weight.clone());
        let x = b.state.amplitude(&keys[0]);
        let y = b.state.amplitude(&keys[1]);
        let u = b.state.amplitude(&keys[2]);
        let v = b.state.amplitude(&keys[3]);
        let bell = [
            (x.clone() + y.clone()).div_sqrt(2)?,
            (x.clone() - y.clone()).div_sqrt(2)?,
            (u.clone() + v.clone()).div_sqrt(2)?,
            (u.clone() - v.clone()).div_sqrt(2)?,
        ];
        let mut in_span = A::zero();
        for (pi, bi) in p.iter_mut().zip(bell) {
            let contrib = w.clone() * bi.abs_sqr();
            in_span = in_span + contrib.clone();
            *pi = pi.clone() + contrib;
        }
        residual = residual + (w * b.state.norm_sqr() - in_span);
    }

    // Anything outside the Bell span of the output pair is leakage.
    let leak_ok = if A::Real::exact() {
        residual.is_zero()
    } else {
        residual.into_real()?.to_f64().abs() <= 1e-9 * total.to_f64().max(1e-300)
    };
    if !leak_ok {
        return Err(Error::Numeric(
            "accepted amplitude outside the Bell span of the output pair".into(),
        ));
    }

    let p: [A::Real; 4] = [
        p[0].clone().into_real()?,
        p[1].clone().into_real()?,
        p[2].clone().into_real()?,
        p[3].clone().into_real()?,
    ];
    let norm = p
        .iter()
        .cloned()
        .fold(A::Real::zero(), |acc, x| acc + x);
    if norm == A::Real::zero() {
        return Err(Error::Domain(
            "protocol accepts no outcome; success probability is zero".into(),
        ));
    }
    let success = norm.clone() / total;
    let weights = [
        p[0].clone() / norm.clone(),
        p[1].clone() / norm.clone(),
        p[2].clone() / norm.clone(),
        p[3].clone() / norm,
    ];
    Ok(PurificationResult {
        success_prob: success,
        output: BellDiagonalState::new(weights)?,
        corrections: Vec::new(),
    })
}
