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

//! Test-side oracles, independent of the library under test.
//!
//! A dense little-endian state-vector simulator re-derives every analytic
//! map from raw gates and Bell projections: the two-copy CNOT purification
//! (with and without the pre-rotation), and the measurement-based round as
//! four Bell-state analyses against three-qubit GHZ resources on a 10-qubit
//! register.  Nothing here calls into the crate's protocol maps.

// Each integration-test binary compiles its own copy of this module and
// uses a different subset of the oracles.
#![allow(dead_code)]

use num_complex::Complex64;

pub type C = Complex64;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Dense n-qubit pure state; qubit q is bit q of the basis index.
#[derive(Clone, Debug)]
pub struct StateVec {
    pub n: usize,
    pub amps: Vec<C>,
}

impl StateVec {
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[index] = C::new(1.0, 0.0);
        StateVec { n, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies the 2×2 matrix `m` (rows indexed by output bit) to qubit `q`.
    pub fn apply1(&mut self, q: usize, m: &[[C; 2]; 2]) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// Tensor product; `other`'s qubits become the high bits.
    pub fn tensor(&self, other: &StateVec) -> StateVec {
        let n = self.n + other.n;
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        for (j, b) in other.amps.iter().enumerate() {
            for (i, a) in self.amps.iter().enumerate() {
                amps[(j << self.n) | i] = a * b;
            }
        }
        StateVec { n, amps }
    }

    /// ⟨bell m| on the qubit pair (qa, qb): returns the (n−2)-qubit
    /// contraction, with qa read as the first qubit of the Bell ket.
    pub fn contract_bell(&self, qa: usize, qb: usize, m: usize) -> StateVec {
        assert!(qa != qb);
        let (lo, hi) = if qa < qb { (qa, qb) } else { (qb, qa) };
        let n = self.n - 2;
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        for (reduced, out) in amps.iter_mut().enumerate() {
            // Re-insert two bits at positions lo < hi.
            let low_part = reduced & ((1 << lo) - 1);
            let mid_part = (reduced >> lo) & ((1 << (hi - lo - 1)) - 1);
            let high_part = reduced >> (hi - 1);
            let base = low_part | (mid_part << (lo + 1)) | (high_part << (hi + 1));
            let mut acc = C::new(0.0, 0.0);
            for a in 0..2usize {
                for b in 0..2usize {
                    let coef = bell_coef(m, a as u8, b as u8);
                    if coef == 0.0 {
                        continue;
                    }
                    let full = base | (a << qa) | (b << qb);
                    acc += C::new(coef, 0.0) * self.amps[full];
                }
            }
            *out = acc;
        }
        StateVec { n, amps }
    }

    /// Bell-basis weights of a 2-qubit state (qubit 0 = Alice).
    pub fn bell_weights(&self) -> [f64; 4] {
        assert_eq!(self.n, 2);
        let mut w = [0.0; 4];
        for (m, wm) in w.iter_mut().enumerate() {
            let mut overlap = C::new(0.0, 0.0);
            for a in 0..2u8 {
                for b in 0..2u8 {
                    overlap += C::new(bell_coef(m, a, b), 0.0)
                        * self.amps[(a as usize) | ((b as usize) << 1)];
                }
            }
            *wm = overlap.norm_sqr();
        }
        w
    }
}

/// ⟨ab| component of Bell state m in the order [Φ⁺, Φ⁻, Ψ⁺, Ψ⁻].
pub fn bell_coef(m: usize, a: u8, b: u8) -> f64 {
    let (amp_bit, phase_bit) = ((m >> 1) as u8, (m & 1) as u8);
    if a ^ b != amp_bit {
        return 0.0;
    }
    if phase_bit == 1 && a == 1 {
        -SQRT_HALF
    } else {
        SQRT_HALF
    }
}

/// The 2-qubit Bell state m on qubits (0, 1).
pub fn bell2(m: usize) -> StateVec {
    let mut s = StateVec::basis(2, 0);
    s.amps[0] = C::new(0.0, 0.0);
    for a in 0..2u8 {
        for b in 0..2u8 {
            s.amps[(a as usize) | ((b as usize) << 1)] = C::new(bell_coef(m, a, b), 0.0);
        }
    }
    s
}

/// Gate-level oracle for one two-copy purification round: bilateral CNOT,
/// Z-measurement of the second pair, keep on equal outcomes.  With
/// `dejmps_rotate`, the ±i single-qubit rotations (Alice −i, Bob +i) are
/// applied first.  Returns (success probability, output Bell weights).
pub fn gate_round_oracle(p: &[f64; 4], q: &[f64; 4], dejmps_rotate: bool) -> (f64, [f64; 4]) {
    let rot_a = [
        [C::new(SQRT_HALF, 0.0), C::new(0.0, -SQRT_HALF)],
        [C::new(0.0, -SQRT_HALF), C::new(SQRT_HALF, 0.0)],
    ];
    let rot_b = [
        [C::new(SQRT_HALF, 0.0), C::new(0.0, SQRT_HALF)],
        [C::new(0.0, SQRT_HALF), C::new(SQRT_HALF, 0.0)],
    ];
    let mut success = 0.0;
    let mut out = [0.0; 4];
    for (i, wi) in p.iter().enumerate() {
        for (j, wj) in q.iter().enumerate() {
            let w = wi * wj;
            if w == 0.0 {
                continue;
            }
            // Qubits: 0 = A1, 1 = B1, 2 = A2, 3 = B2.
            let mut s = bell2(i).tensor(&bell2(j));
            if dejmps_rotate {
                for qubit in [0, 2] {
                    s.apply1(qubit, &rot_a);
                }
                for qubit in [1, 3] {
                    s.apply1(qubit, &rot_b);
                }
            }
            s.cnot(0, 2);
            s.cnot(1, 3);
            for z in 0..2usize {
                // Reduced (A1, B1) vector with A2 = B2 = z.
                let mut kept = StateVec::basis(2, 0);
                for a1 in 0..2usize {
                    for b1 in 0..2usize {
                        kept.amps[a1 | (b1 << 1)] =
                            s.amps[a1 | (b1 << 1) | (z << 2) | (z << 3)];
                    }
                }
                success += w * kept.norm_sqr();
                for (k, wk) in kept.bell_weights().iter().enumerate() {
                    out[k] += w * wk;
                }
            }
        }
    }
    let total: f64 = out.iter().sum();
    (success, out.map(|x| x / total))
}

/// Derives the (source, target) → (source′, target′) component table of the
/// bilateral CNOT from the 4-qubit state vector: for pure Bell inputs the
/// output is again a product of Bell states, identified by unit overlap.
pub fn derived_cnot_table() -> [[(usize, usize); 4]; 4] {
    let mut table = [[(usize::MAX, usize::MAX); 4]; 4];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut s = bell2(i).tensor(&bell2(j));
            s.cnot(0, 2);
            s.cnot(1, 3);
            for (si, sj) in (0..4).flat_map(|a| (0..4).map(move |b| (a, b))) {
                let reference = bell2(si).tensor(&bell2(sj));
                let overlap: f64 = s
                    .amps
                    .iter()
                    .zip(&reference.amps)
                    .map(|(x, y)| (x.conj() * y).re)
                    .sum();
                if (overlap.abs() - 1.0).abs() < 1e-12 {
                    *cell = (si, sj);
                }
            }
            assert_ne!(cell.0, usize::MAX, "CNOT output of ({i},{j}) is not a Bell product");
        }
    }
    table
}

/// Rational table-enumeration oracle built from [`derived_cnot_table`]:
/// exact success probability and normalized output weights of one
/// keep-on-equal-Z round on two identical copies.
pub fn rational_round_oracle(
    p: &[num_rational::BigRational; 4],
) -> (num_rational::BigRational, [num_rational::BigRational; 4]) {
    let table = derived_cnot_table();
    let zero = || num_rational::BigRational::from_integer(0.into());
    let mut success = zero();
    let mut kept = [zero(), zero(), zero(), zero()];
    for i in 0..4 {
        for j in 0..4 {
            let (out, tgt) = table[i][j];
            // Equal Z outcomes on the target pair ⇔ the target component is
            // Φ-type (indices 0 and 1).
            if tgt < 2 {
                let w = &p[i] * &p[j];
                kept[out] += &w;
                success += w;
            }
        }
    }
    let normalized = kept.map(|w| w / &success);
    (success, normalized)
}

/// Everything the 10-qubit measurement-based oracle reports for one Bell
/// analyzer outcome tuple under one pure Bell-pair input combination.
pub struct MbeppOutcomeRecord {
    /// Probability of this outcome tuple.
    pub probability: f64,
    /// Output Bell weights on the resources' free pair, *before* correction.
    pub raw_weights: [f64; 4],
}

/// Measurement-based round as an explicit 10-qubit state-vector experiment:
/// noisy pairs (a1,b1), (a2,b2) in Bell states (i, j); resources are
/// three-qubit GHZ states (|000⟩+|111⟩)/√2 at Alice (c1,c2,c3) and Bob
/// (d1,d2,d3); Bell analyses on (a1,c1), (a2,c2), (b1,d1), (b2,d2) with
/// outcome tuple `ms`; the output pair is (c3,d3).
pub fn mbepp_outcome_oracle(i: usize, j: usize, ms: [usize; 4]) -> MbeppOutcomeRecord {
    let mut ghz = StateVec::basis(3, 0);
    ghz.amps[0] = C::new(SQRT_HALF, 0.0);
    ghz.amps[7] = C::new(SQRT_HALF, 0.0);
    // Qubits: 0=a1 1=b1 2=a2 3=b2 4=c1 5=c2 6=c3 7=d1 8=d2 9=d3.
    let s = bell2(i).tensor(&bell2(j)).tensor(&ghz).tensor(&ghz);
    let s = s.contract_bell(0, 4, ms[0]); // (a1,c1); left: b1,a2,b2,c2,c3,d1,d2,d3
    let s = s.contract_bell(1, 3, ms[1]); // (a2,c2); left: b1,b2,c3,d1,d2,d3
    let s = s.contract_bell(0, 3, ms[2]); // (b1,d1); left: b2,c3,d2,d3
    let s = s.contract_bell(0, 2, ms[3]); // (b2,d2); left: c3,d3
    MbeppOutcomeRecord {
        probability: s.norm_sqr(),
        raw_weights: s.bell_weights(),
    }
}
