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

//! Sparse Fock-space states over polarization/spatial modes.
//!
//! A *slot* is a spatial mode name together with a polarization, e.g.
//! (a₃, H).  An [`OccupationKey`] records how many photons sit in each slot;
//! an [`OpticalState`] is a sparse complex combination of occupation keys.
//! States are kept **unnormalized**: postselection and measurement report
//! probabilities as squared norms of the conditioned components, which keeps
//! exact-ring amplitudes free of irrational normalization factors.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::amplitude::Amplitude;

/// Photon polarization, the qubit degree of freedom of every protocol here.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Horizontal |H⟩.
    H,
    /// Vertical |V⟩.
    V,
}

impl Polarization {
    /// The orthogonal polarization.
    pub fn flipped(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => write!(f, "H"),
            Polarization::V => write!(f, "V"),
        }
    }
}

/// A single bosonic mode: spatial path plus polarization.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    /// Spatial path identifier (a₁, b₃, h₅, …).
    pub name: String,
    /// Polarization component of the path.
    pub polarization: Polarization,
}

impl ModeLabel {
    /// Convenience constructor.
    pub fn new(name: impl Into<String>, polarization: Polarization) -> Self {
        ModeLabel {
            name: name.into(),
            polarization,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.polarization, self.name)
    }
}

/// Photon occupation numbers of a Fock basis vector.
///
/// Slots with zero photons are never stored, so equal states compare equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct OccupationKey {
    counts: BTreeMap<ModeLabel, u8>,
}

impl OccupationKey {
    /// The vacuum.
    pub fn vacuum() -> Self {
        OccupationKey::default()
    }

    /// Builds a key from (path, polarization, count) triples; repeated slots
    /// accumulate.
    pub fn from_slots<I>(slots: I) -> Self
    where
        I: IntoIterator<Item = (String, Polarization, u8)>,
    {
        let mut key = OccupationKey::vacuum();
        for (name, pol, n) in slots {
            key.add(&ModeLabel::new(name, pol), n);
        }
        key
    }

    /// Photon count in one slot.
    pub fn count(&self, slot: &ModeLabel) -> u8 {
        self.counts.get(slot).copied().unwrap_or(0)
    }

    /// Total photons in all polarizations of a spatial path.
    pub fn mode_total(&self, name: &str) -> u8 {
        self.counts
            .iter()
            .filter(|(m, _)| m.name == name)
            .map(|(_, n)| *n)
            .sum()
    }

    /// Total photon number.
    pub fn total(&self) -> u32 {
        self.counts.values().map(|n| *n as u32).sum()
    }

    /// Adds `n` photons to a slot.
    pub fn add(&mut self, slot: &ModeLabel, n: u8) {
        if n == 0 {
            return;
        }
        *self.counts.entry(slot.clone()).or_insert(0) += n;
    }

    /// Removes `n` photons from a slot; fails if fewer are present.
    pub fn remove(&mut self, slot: &ModeLabel, n: u8) -> Result<()> {
        let have = self.count(slot);
        if have < n {
            return Err(Error::Domain(format!(
                "cannot remove {n} photon(s) from slot {slot} holding {have}"
            )));
        }
        if have == n {
            self.counts.remove(slot);
        } else {
            *self.counts.get_mut(slot).expect("slot present") -= n;
        }
        Ok(())
    }

    /// Iterates over occupied slots.
    pub fn slots(&self) -> impl Iterator<Item = (&ModeLabel, u8)> {
        self.counts.iter().map(|(m, n)| (m, *n))
    }

    /// Merges two keys over disjoint-or-not slot sets (counts add).
    pub fn merged(&self, other: &OccupationKey) -> OccupationKey {
        let mut out = self.clone();
        for (slot, n) in other.slots() {
            out.add(slot, n);
        }
        out
    }
}

impl fmt::Display for OccupationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return write!(f, "|vac⟩");
        }
        write!(f, "|")?;
        for (i, (slot, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *n == 1 {
                write!(f, "{slot}")?;
            } else {
                write!(f, "{n}{slot}")?;
            }
        }
        write!(f, "⟩")
    }
}

/// Sparse Fock-space state: complex amplitudes on occupation keys.
#[derive(Clone, PartialEq, Debug)]
pub struct OpticalState<A: Amplitude> {
    amps: BTreeMap<OccupationKey, A>,
    truncation: u32,
}

impl<A: Amplitude> OpticalState<A> {
    /// The zero state (no components) with the given total-photon cap.
    pub fn empty(truncation: u32) -> Self {
        OpticalState {
            amps: BTreeMap::new(),
            truncation,
        }
    }

    /// The vacuum state |vac⟩ with amplitude one.
    pub fn vacuum(truncation: u32) -> Self {
        let mut s = Self::empty(truncation);
        s.amps.insert(OccupationKey::vacuum(), A::one());
        s
    }

    /// Total-photon cap this state was built with.
    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Adds `amp` to the coefficient of `key`, enforcing the photon cap.
    pub fn accumulate(&mut self, key: OccupationKey, amp: A) -> Result<()> {
        if amp.is_zero() {
            return Ok(());
        }
        if key.total() > self.truncation {
            return Err(Error::Truncation {
                required: key.total() as usize,
                truncation: self.truncation as usize,
            });
        }
        let entry = self.amps.entry(key).or_insert_with(A::zero);
        *entry = entry.clone() + amp;
        Ok(())
    }

    /// Adds a creation-operator monomial Π (â†ₛ)ⁿ applied to |vac⟩, i.e. the
    /// key with the bosonic √n! normalization factors folded into `coeff`.
    pub fn accumulate_monomial(
        &mut self,
        slots: &[(ModeLabel, u8)],
        coeff: A,
    ) -> Result<()> {
        let mut key = OccupationKey::vacuum();
        let mut amp = coeff;
        for (slot, n) in slots {
            for _ in 0..*n {
                key.add(slot, 1);
                amp = amp.mul_sqrt(key.count(slot) as u32)?;
            }
        }
        self.accumulate(key, amp)
    }

    /// Drops exact zeros accumulated by cancellations.
    pub fn prune(&mut self) {
        self.amps.retain(|_, a| !a.is_zero());
    }

    /// Iterates over (key, amplitude) components.
    pub fn components(&self) -> impl Iterator<Item = (&OccupationKey, &A)> {
        self.amps.iter()
    }

    /// Number of stored components.
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    /// True if no components are stored.
    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Amplitude of one key (zero if absent).
    pub fn amplitude(&self, key: &OccupationKey) -> A {
        self.amps.get(key).cloned().unwrap_or_else(A::zero)
    }

    /// Squared norm ⟨ψ|ψ⟩ as a ring element.
    pub fn norm_sqr(&self) -> A {
        let mut acc = A::zero();
        for a in self.amps.values() {
            acc = acc + a.clone().abs_sqr();
        }
        acc
    }

    /// Keeps only components satisfying `pred`; returns the discarded
    /// squared norm.
    pub fn retain_filter<F>(&mut self, mut pred: F) -> A
    where
        F: FnMut(&OccupationKey) -> bool,
    {
        let mut dropped = A::zero();
        let old = std::mem::take(&mut self.amps);
        for (k, a) in old {
            if pred(&k) {
                self.amps.insert(k, a);
            } else {
                dropped = dropped + a.abs_sqr();
            }
        }
        dropped
    }

    /// Maps every component through `f`, which may fan out into several
    /// keys; amplitudes landing on equal keys add coherently.
    pub fn flat_map<F>(&self, mut f: F) -> Result<OpticalState<A>>
    where
        F: FnMut(&OccupationKey, &A, &mut OpticalState<A>) -> Result<()>,
    {
        let mut out = OpticalState::empty(self.truncation);
        for (k, a) in &self.amps {
            f(k, a, &mut out)?;
        }
        out.prune();
        Ok(out)
    }

    /// Tensor product with a state over (expected-disjoint) modes.
    pub fn tensor(&self, other: &OpticalState<A>) -> Result<OpticalState<A>> {
        let truncation = self.truncation.max(other.truncation);
        let mut out = OpticalState::empty(truncation);
        for (k1, a1) in &self.amps {
            for (k2, a2) in &other.amps {
                out.accumulate(k1.merged(k2), a1.clone() * a2.clone())?;
            }
        }
        Ok(out)
    }
}
