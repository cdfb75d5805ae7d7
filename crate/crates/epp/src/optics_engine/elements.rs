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

//! Linear-optical elements and their action on Fock states.
//!
//! Every element is a unitary substitution on creation operators,
//! â†ₛ ↦ Σₒ cₛₒ â†ₒ.  Applying an element to an occupation key strips the
//! touched slots (picking up 1/√n! per slot), pushes each photon through the
//! substitution, and recreates photons one by one (picking up √(count) per
//! creation), so bosonic statistics — stimulated emission, Hong–Ou–Mandel
//! interference — emerge exactly.
//!
//! Conventions (each is a fixed unitary; postselected probabilities are
//! convention-invariant, but they are pinned here for reproducibility):
//!
//! * **PBS** transmits |H⟩ (in₁→out₁, in₂→out₂) and reflects |V⟩
//!   (in₁→out₂, in₂→out₁) with unit coefficients — a pure slot permutation.
//! * **CPBS** transmits |+⟩ and reflects |−⟩ the same way.
//! * **HWP** at 45°: |H⟩ ↔ |V⟩.
//! * **BD** (beam displacer): couples (in₁,H) and (in₂,V) into out₁, and
//!   (in₁,V) and (in₂,H) into out₂, polarization preserved.
//! * **BS**: symmetric 50:50, factor i on reflection.
//! * **Phase**: multiplies each photon in the addressed slot(s) by
//!   i^quarter_turns (quarter_turns = 2 on V implements σ_z).
//! * **Swap**: relabels two spatial paths.

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::amplitude::Amplitude;
use super::state::{ModeLabel, OccupationKey, OpticalState, Polarization};

/// A linear-optical element acting on one or two spatial paths.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum OpticalElement {
    /// Polarizing beam splitter in the H/V basis.
    Pbs {
        /// First input path (transmits to `out1`).
        in1: String,
        /// Second input path (transmits to `out2`).
        in2: String,
        /// Output receiving H from `in1` and V from `in2`.
        out1: String,
        /// Output receiving H from `in2` and V from `in1`.
        out2: String,
    },
    /// Polarizing beam splitter in the ± basis (transmits |+⟩, reflects |−⟩).
    Cpbs {
        /// First input path.
        in1: String,
        /// Second input path.
        in2: String,
        /// Output receiving + from `in1` and − from `in2`.
        out1: String,
        /// Output receiving + from `in2` and − from `in1`.
        out2: String,
    },
    /// Half-wave plate at 45°: |H⟩ ↔ |V⟩ on one path.
    Hwp {
        /// Addressed path.
        mode: String,
    },
    /// Beam displacer merging two paths by polarization.
    Bd {
        /// First input path.
        in1: String,
        /// Second input path.
        in2: String,
        /// Output receiving (in₁,H) and (in₂,V).
        out1: String,
        /// Output receiving (in₁,V) and (in₂,H).
        out2: String,
    },
    /// Symmetric 50:50 beam splitter (i on reflection), polarization-blind.
    Bs {
        /// First input path.
        in1: String,
        /// Second input path.
        in2: String,
        /// Output aligned with `in1` transmission.
        out1: String,
        /// Output aligned with `in2` transmission.
        out2: String,
    },
    /// Per-photon phase i^quarter_turns on a path (optionally one
    /// polarization only).
    Phase {
        /// Addressed path.
        mode: String,
        /// If set, only this polarization is phased (σ_z = 2 quarter turns
        /// on V).
        polarization: Option<Polarization>,
        /// Phase in units of 90°.
        quarter_turns: u8,
    },
    /// Relabels path `a` as `b` and vice versa.
    Swap {
        /// First path.
        a: String,
        /// Second path.
        b: String,
    },
}

/// Slot-substitution coefficient ε·i^qt·(1/√2)^hp.
#[derive(Clone, Copy, Debug)]
struct Coef {
    quarter_turns: u8,
    half_pow: u8,
}

impl Coef {
    const ONE: Coef = Coef {
        quarter_turns: 0,
        half_pow: 0,
    };

    fn apply<A: Amplitude>(&self, mut a: A) -> Result<A> {
        for _ in 0..(self.quarter_turns % 4) {
            a = a.times_i();
        }
        for _ in 0..self.half_pow {
            a = a.div_sqrt(2)?;
        }
        Ok(a)
    }
}

impl OpticalElement {
    /// Spatial paths read by this element.
    pub fn input_paths(&self) -> Vec<&str> {
        match self {
            OpticalElement::Pbs { in1, in2, .. }
            | OpticalElement::Cpbs { in1, in2, .. }
            | OpticalElement::Bd { in1, in2, .. }
            | OpticalElement::Bs { in1, in2, .. } => vec![in1, in2],
            OpticalElement::Hwp { mode } => vec![mode],
            OpticalElement::Phase { mode, .. } => vec![mode],
            OpticalElement::Swap { a, b } => vec![a, b],
        }
    }

    /// Spatial paths written by this element.
    pub fn output_paths(&self) -> Vec<&str> {
        match self {
            OpticalElement::Pbs { out1, out2, .. }
            | OpticalElement::Cpbs { out1, out2, .. }
            | OpticalElement::Bd { out1, out2, .. }
            | OpticalElement::Bs { out1, out2, .. } => vec![out1, out2],
            OpticalElement::Hwp { mode } => vec![mode],
            OpticalElement::Phase { mode, .. } => vec![mode],
            OpticalElement::Swap { a, b } => vec![a, b],
        }
    }

    /// True if the element addresses photons in the given slot.
    fn touches(&self, slot: &ModeLabel) -> bool {
        match self {
            OpticalElement::Phase {
                mode,
                polarization: Some(p),
                ..
            } => slot.name == *mode && slot.polarization == *p,
            _ => self.input_paths().iter().any(|m| slot.name == **m),
        }
    }

    /// Creation-operator substitution for one input slot.
    fn targets(&self, slot: &ModeLabel) -> Vec<(ModeLabel, Coef)> {
        let pol = slot.polarization;
        match self {
            OpticalElement::Pbs {
                in1,
                in2,
                out1,
                out2,
            } => {
                let out = match (slot.name == *in1, pol) {
                    (true, Polarization::H) => out1,
                    (true, Polarization::V) => out2,
                    (false, Polarization::H) => out2,
                    (false, Polarization::V) => out1,
                };
                debug_assert!(slot.name == *in1 || slot.name == *in2);
                vec![(ModeLabel::new(out.clone(), pol), Coef::ONE)]
            }
            OpticalElement::Cpbs {
                in1,
                in2,
                out1,
                out2,
            } => {
                // â†_{m,H} = (â†_{m,+} + â†_{m,−})/√2 and the ± components
                // route to different outputs; expanding back to H/V gives a
                // four-term map with ±1/2 coefficients.
                let from_first = slot.name == *in1;
                debug_assert!(from_first || slot.name == *in2);
                let (plus_out, minus_out) = if from_first {
                    (out1, out2)
                } else {
                    (out2, out1)
                };
                let minus_sign = match pol {
                    Polarization::H => 0, // H = (+ + −)/√2
                    Polarization::V => 2, // V = (+ − −)/√2
                };
                vec![
                    (
                        ModeLabel::new(plus_out.clone(), Polarization::H),
                        Coef {
                            quarter_turns: 0,
                            half_pow: 2,
                        },
                    ),
                    (
                        ModeLabel::new(plus_out.clone(), Polarization::V),
                        Coef {
                            quarter_turns: 0,
                            half_pow: 2,
                        },
                    ),
                    (
                        ModeLabel::new(minus_out.clone(), Polarization::H),
                        Coef {
                            quarter_turns: minus_sign,
                            half_pow: 2,
                        },
                    ),
                    (
                        ModeLabel::new(minus_out.clone(), Polarization::V),
                        Coef {
                            quarter_turns: (minus_sign + 2) % 4,
                            half_pow: 2,
                        },
                    ),
                ]
            }
            OpticalElement::Hwp { mode } => {
                debug_assert_eq!(slot.name, *mode);
                vec![(ModeLabel::new(mode.clone(), pol.flipped()), Coef::ONE)]
            }
            OpticalElement::Bd {
                in1,
                in2,
                out1,
                out2,
            } => {
                let from_first = slot.name == *in1;
                debug_assert!(from_first || slot.name == *in2);
                let out = match (from_first, pol) {
                    (true, Polarization::H) => out1,
                    (true, Polarization::V) => out2,
                    (false, Polarization::V) => out1,
                    (false, Polarization::H) => out2,
                };
                vec![(ModeLabel::new(out.clone(), pol), Coef::ONE)]
            }
            OpticalElement::Bs {
                in1,
                in2,
                out1,
                out2,
            } => {
                let from_first = slot.name == *in1;
                debug_assert!(from_first || slot.name == *in2);
                let (trans, refl) = if from_first {
                    (out1, out2)
                } else {
                    (out2, out1)
                };
                vec![
                    (
                        ModeLabel::new(trans.clone(), pol),
                        Coef {
                            quarter_turns: 0,
                            half_pow: 1,
                        },
                    ),
                    (
                        ModeLabel::new(refl.clone(), pol),
                        Coef {
                            quarter_turns: 1,
                            half_pow: 1,
                        },
                    ),
                ]
            }
            OpticalElement::Phase { quarter_turns, .. } => vec![(
                slot.clone(),
                Coef {
                    quarter_turns: *quarter_turns,
                    half_pow: 0,
                },
            )],
            OpticalElement::Swap { a, b } => {
                let out = if slot.name == *a { b } else { a };
                vec![(ModeLabel::new(out.clone(), pol), Coef::ONE)]
            }
        }
    }
}

/// Applies one element to a state.
///
/// Photon number is conserved, so the truncation cap cannot be exceeded; the
/// squared norm is preserved exactly (unitarity), which the test suite
/// checks on random states.
pub fn apply_element<A: Amplitude>(
    state: &OpticalState<A>,
    element: &OpticalElement,
) -> Result<OpticalState<A>> {
    state.flat_map(|key, amp, out| {
        // Split the key into touched photons and an untouched rest.
        let mut rest = OccupationKey::vacuum();
        let mut photons: Vec<ModeLabel> = Vec::new();
        let mut base = amp.clone();
        for (slot, n) in key.slots() {
            if element.touches(slot) {
                // Strip: |n⟩ = (â†)ⁿ/√n! |0⟩ ⇒ amplitude gains 1/√n!.
                for k in 1..=n {
                    base = base.div_sqrt(k as u32)?;
                    photons.push(slot.clone());
                }
            } else {
                rest.add(slot, n);
            }
        }
        if photons.is_empty() {
            out.accumulate(key.clone(), amp.clone())?;
            return Ok(());
        }
        // Re-create photons one at a time through the substitution map.
        let mut frontier: Vec<(OccupationKey, A)> = vec![(rest, base)];
        for slot in &photons {
            let mut next: Vec<(OccupationKey, A)> = Vec::new();
            for (k, a) in &frontier {
                for (target, coef) in element.targets(slot) {
                    let mut k2 = k.clone();
                    k2.add(&target, 1);
                    let a2 = coef
                        .apply(a.clone())?
                        .mul_sqrt(k2.count(&target) as u32)?;
                    next.push((k2, a2));
                }
            }
            frontier = next;
        }
        for (k, a) in frontier {
            out.accumulate(k, a)?;
        }
        Ok(())
    })
}

/// Applies a sequence of elements.
pub fn apply_elements<A: Amplitude>(
    state: &OpticalState<A>,
    elements: &[OpticalElement],
) -> Result<OpticalState<A>> {
    let mut s = state.clone();
    for e in elements {
        s = apply_element(&s, e)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type S64 = OpticalState<Complex64>;

    fn one_photon(name: &str, pol: Polarization) -> S64 {
        let mut s = S64::empty(4);
        s.accumulate(
            OccupationKey::from_slots([(name.to_string(), pol, 1)]),
            <Complex64 as Amplitude>::one(),
        )
        .unwrap();
        s
    }

    fn norm(s: &S64) -> f64 {
        s.norm_sqr().into_real().unwrap()
    }

    #[test]
    fn pbs_routes_by_polarization() {
        let pbs = OpticalElement::Pbs {
            in1: "a1".into(),
            in2: "a2".into(),
            out1: "a4".into(),
            out2: "a3".into(),
        };
        let h = apply_element(&one_photon("a1", Polarization::H), &pbs).unwrap();
        assert_eq!(
            h.components().next().unwrap().0,
            &OccupationKey::from_slots([("a4".to_string(), Polarization::H, 1)])
        );
        let v = apply_element(&one_photon("a1", Polarization::V), &pbs).unwrap();
        assert_eq!(
            v.components().next().unwrap().0,
            &OccupationKey::from_slots([("a3".to_string(), Polarization::V, 1)])
        );
    }

    #[test]
    fn hwp_flips_polarization() {
        let hwp = OpticalElement::Hwp { mode: "a".into() };
        let s = apply_element(&one_photon("a", Polarization::H), &hwp).unwrap();
        assert_eq!(
            s.components().next().unwrap().0,
            &OccupationKey::from_slots([("a".to_string(), Polarization::V, 1)])
        );
    }

    #[test]
    fn bs_is_balanced_and_unitary() {
        let bs = OpticalElement::Bs {
            in1: "a".into(),
            in2: "b".into(),
            out1: "c".into(),
            out2: "d".into(),
        };
        let s = apply_element(&one_photon("a", Polarization::H), &bs).unwrap();
        assert_eq!(s.len(), 2);
        assert!((norm(&s) - 1.0).abs() < 1e-12);
        for (_, a) in s.components() {
            assert!((a.norm_sqr() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn hong_ou_mandel_bunching() {
        // Two identical photons on a 50:50 BS never exit separately.
        let bs = OpticalElement::Bs {
            in1: "a".into(),
            in2: "b".into(),
            out1: "c".into(),
            out2: "d".into(),
        };
        let pair = one_photon("a", Polarization::H)
            .tensor(&one_photon("b", Polarization::H))
            .unwrap();
        let out = apply_element(&pair, &bs).unwrap();
        let split = OccupationKey::from_slots([
            ("c".to_string(), Polarization::H, 1),
            ("d".to_string(), Polarization::H, 1),
        ]);
        assert!(out.amplitude(&split).is_zero());
        assert!((norm(&out) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cpbs_norm_preserved() {
        let cpbs = OpticalElement::Cpbs {
            in1: "a".into(),
            in2: "b".into(),
            out1: "u".into(),
            out2: "v".into(),
        };
        // |+⟩ on path a must exit entirely in u.
        let mut plus = S64::empty(4);
        plus.accumulate(
            OccupationKey::from_slots([("a".to_string(), Polarization::H, 1)]),
            <Complex64 as Amplitude>::one().div_sqrt(2).unwrap(),
        )
        .unwrap();
        plus.accumulate(
            OccupationKey::from_slots([("a".to_string(), Polarization::V, 1)]),
            <Complex64 as Amplitude>::one().div_sqrt(2).unwrap(),
        )
        .unwrap();
        let out = apply_element(&plus, &cpbs).unwrap();
        assert!((norm(&out) - 1.0).abs() < 1e-12);
        for (k, _) in out.components() {
            assert_eq!(k.mode_total("u"), 1);
            assert_eq!(k.mode_total("v"), 0);
        }
    }

    #[test]
    fn sigma_z_phase() {
        let z = OpticalElement::Phase {
            mode: "a".into(),
            polarization: Some(Polarization::V),
            quarter_turns: 2,
        };
        let v = apply_element(&one_photon("a", Polarization::V), &z).unwrap();
        assert!((v.components().next().unwrap().1.re + 1.0).abs() < 1e-12);
        let h = apply_element(&one_photon("a", Polarization::H), &z).unwrap();
        assert!((h.components().next().unwrap().1.re - 1.0).abs() < 1e-12);
    }
}
