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

//! Hyperentanglement-assisted purification.
//!
//! Photon pairs entangled simultaneously in polarization and in a second
//! degree of freedom (spatial mode or time bin) allow purification maps
//! that either consume the second DOF to clean the first in a single copy,
//! or purify both DOFs in parallel:
//!
//! * [`single_copy_round`] — compare the polarization and spatial parities
//!   of one pair; the pair is kept when they agree;
//! * [`deterministic_round`] — the one-step deterministic protocol: a pure
//!   spatial |φ_s⁺⟩ sorts every polarization branch onto a heralding
//!   coincidence class, so nothing is ever discarded;
//! * [`qnd_spdc_fidelity`] — residual infidelity after a QND parity check
//!   filters the multi-pair emissions of a down-conversion source;
//! * [`hepp_two_step`] — the two-step protocol for states mixed in both
//!   DOFs, with and without the state-joining measurement that recycles the
//!   half-failed branches;
//! * [`qd_transmission`] — the quantum-dot-cavity transmission amplitude
//!   underlying the parity-check hardware.

use num_complex::Complex64;

use crate::bell_core::{
    BellComponent, BellDiagonalState, Party, Pauli, PurificationResult, NORM_TOL,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A product mixture over two degrees of freedom of the same photon pair:
/// polarization and spatial mode (or time bin).
#[derive(Clone, Debug, PartialEq)]
pub struct HyperDiagonalState<S: Scalar> {
    pub pol: BellDiagonalState<S>,
    pub spat: BellDiagonalState<S>,
}

fn check_probability<S: Scalar>(name: &str, x: &S) -> Result<()> {
    let v = x.to_f64();
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0,1]")));
    }
    Ok(())
}

/// One single-copy round: a rank-2 polarization mixture {Φ⁺: F_p, Ψ⁺: 1−F_p}
/// rides on a rank-2 spatial mixture {φ_s⁺: F_s, ψ_s⁺: 1−F_s}; beam
/// displacers sort the four branches so that equal parities (both Φ-type or
/// both Ψ-type) land on the accepting coincidence classes.
///
/// F_n = F_p F_s / (F_p F_s + (1−F_p)(1−F_s)), kept with that denominator's
/// probability. F_n > max(F_p, F_s) whenever both inputs exceed 1/2.
pub fn single_copy_round<S: Scalar>(fp: S, fs: S) -> Result<PurificationResult<S>> {
    check_probability("F_p", &fp)?;
    check_probability("F_s", &fs)?;
    let phi = fp.clone() * fs.clone();
    let psi = (S::one() - fp) * (S::one() - fs);
    let success = phi.clone() + psi.clone();
    if success.to_f64() <= 0.0 {
        return Err(Error::Domain(
            "parities disagree with certainty; the kept branch is empty".into(),
        ));
    }
    Ok(PurificationResult {
        success_prob: success,
        output: BellDiagonalState::from_weights([phi, S::zero(), psi, S::zero()])?,
        corrections: vec![],
    })
}

/// Fidelity after a QND parity check screens a down-conversion source that
/// emits one pair with probability ∝ p and two pairs with probability ∝ p².
///
/// The check passes the single-pair branch and, among the double-pair
/// branches, only the equal-phase-shift one; the surviving weight is
/// (2p + p²F²) / (2p + p²[F² + (1−F)²]).
pub fn qnd_spdc_fidelity<S: Scalar>(p: S, f: S) -> Result<S> {
    let pv = p.to_f64();
    if !(0.0 < pv && pv < 1.0) {
        return Err(Error::Domain(format!("emission probability {pv} outside (0,1)")));
    }
    check_probability("F", &f)?;
    let two_p = S::from_ratio(2, 1) * p.clone();
    let p2 = p.clone() * p;
    let f2 = f.clone() * f.clone();
    let g2 = (S::one() - f.clone()) * (S::one() - f);
    Ok((two_p.clone() + p2.clone() * f2.clone()) / (two_p + p2 * (f2 + g2)))
}

/// The polarization factor accepted by [`deterministic_round`]: either a
/// Bell-diagonal mixture or a mixture of the four computational product
/// states |HH⟩, |VV⟩, |HV⟩, |VH⟩ — the protocol needs no polarization
/// entanglement at all.
#[derive(Clone, Debug, PartialEq)]
pub enum PolarizationMixture<S: Scalar> {
    BellDiagonal(BellDiagonalState<S>),
    /// Weights on |HH⟩, |VV⟩, |HV⟩, |VH⟩, summing to one.
    ComputationalDiagonal([S; 4]),
}

/// The one-step deterministic protocol: a pure spatial |φ_s⁺⟩ routes every
/// polarization component onto one of four coincidence classes, two of
/// which herald |Φ⁺⟩ directly and two of which herald |Ψ⁺⟩ (fixed by a σ_x
/// on one photon). Nothing is ever discarded: success probability 1 and
/// output fidelity 1 for any input weights.
///
/// The reported correction is the heralded σ_x applied on the Ψ-signaling
/// classes; it is already folded into the output.
pub fn deterministic_round<S: Scalar>(
    pol: &PolarizationMixture<S>,
    spat: &BellDiagonalState<S>,
) -> Result<PurificationResult<S>> {
    let purity = spat.weight(BellComponent::PHI_PLUS);
    if (purity.to_f64() - 1.0).abs() > NORM_TOL || (S::exact() && purity != S::one()) {
        return Err(Error::UnsupportedMixture(
            "the deterministic round requires a pure spatial |φ_s⁺⟩ resource".into(),
        ));
    }
    // Every branch is kept: Φ-type polarization (or |HH⟩/|VV⟩) exits on the
    // identity classes, Ψ-type (or |HV⟩/|VH⟩) on the σ_x classes; spatial
    // phase information is erased by the coincidence, so Φ⁻/Ψ⁻ behave as
    // their + partners.
    if let PolarizationMixture::ComputationalDiagonal(w) = pol {
        let sum = w.iter().cloned().fold(S::zero(), |a, b| a + b);
        if (sum.to_f64() - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain("computational weights must sum to 1".into()));
        }
    }
    Ok(PurificationResult {
        success_prob: S::one(),
        output: BellDiagonalState::phi_plus(),
        corrections: vec![(Party::Bob, Pauli::X)],
    })
}

/// Input-output parameters of a double-sided quantum-dot-cavity system.
/// All quantities share one frequency unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QDCavityParams {
    /// Cavity frequency ω_c.
    pub w_c: f64,
    /// Input photon frequency ω.
    pub w: f64,
    /// Exciton transition frequency ω_{X⁻}.
    pub w_x: f64,
    /// Exciton–cavity coupling strength g.
    pub g: f64,
    /// Cavity input-coupling rate κ.
    pub kappa: f64,
    /// Cavity side-leakage rate κ_s.
    pub kappa_s: f64,
    /// Exciton decay rate γ.
    pub gamma: f64,
}

/// Weak-excitation transmission and reflection amplitudes of the cavity:
///
/// t(ω) = −κ[i(ω_X − ω) + γ/2] /
///        ([i(ω_X − ω) + γ/2][i(ω_c − ω) + κ + κ_s/2] + g²),
/// r(ω) = 1 + t(ω).
pub fn qd_transmission(params: &QDCavityParams) -> Result<(Complex64, Complex64)> {
    for (name, rate) in [
        ("g", params.g),
        ("kappa", params.kappa),
        ("kappa_s", params.kappa_s),
        ("gamma", params.gamma),
    ] {
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::Domain(format!("rate {name} = {rate} must be non-negative")));
        }
    }
    let dx = Complex64::new(params.gamma / 2.0, params.w_x - params.w);
    let dc = Complex64::new(params.kappa + params.kappa_s / 2.0, params.w_c - params.w);
    let den = dx * dc + Complex64::new(params.g * params.g, 0.0);
    if den.norm() < 1e-300 {
        return Err(Error::Domain("singular cavity parameters: zero denominator".into()));
    }
    let t = -params.kappa * dx / den;
    Ok((t, 1.0 + t))
}

/// Disposition of a two-copy branch in the two-step protocol, classified by
/// whether the parity-check outcomes of the two copies agree in each DOF.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeppDisposition {
    /// Both DOFs agree: keep, both fidelities improve.
    Keep,
    /// Both disagree: the errors are indistinguishable, discard.
    Discard,
    /// Polarization agrees, spatial does not: the polarization state is
    /// still good and is recycled through the state-joining step.
    RecyclePolarization,
    /// Spatial agrees, polarization does not: the spatial state is recycled.
    RecycleSpatial,
}

/// Branch table of the two-step protocol: `same_pol`/`same_spat` say whether
/// the two copies produced equal parity-check outcomes in that DOF.
pub fn hepp_branch(same_pol: bool, same_spat: bool) -> HeppDisposition {
    match (same_pol, same_spat) {
        (true, true) => HeppDisposition::Keep,
        (false, false) => HeppDisposition::Discard,
        (true, false) => HeppDisposition::RecyclePolarization,
        (false, true) => HeppDisposition::RecycleSpatial,
    }
}

/// Closed forms of the two-step protocol on two copies of
/// [F_p |φ₁⟩ᴾ + (1−F_p)|φ₃⟩ᴾ] ⊗ [F_s |φ₁⟩ˢ + (1−F_s)|φ₂⟩ˢ].
#[derive(Clone, Debug, PartialEq)]
pub struct HeppTwoStep<S: Scalar> {
    /// F_p′ = F_p² / (F_p² + (1−F_p)²).
    pub fp_out: S,
    /// F_s′ = F_s² / (F_s² + (1−F_s)²).
    pub fs_out: S,
    /// Overall output fidelity F_p′ · F_s′.
    pub fidelity: S,
    /// Yield with the state-joining measurement recycling the half-failed
    /// branches: F_s² + (1−F_s)².
    pub eff_with_qsjm: S,
    /// Yield when both DOFs must pass at once:
    /// [F_p² + (1−F_p)²][F_s² + (1−F_s)²].
    pub eff_without: S,
}

/// Evaluate the two-step protocol's output fidelities and the two yields.
pub fn hepp_two_step<S: Scalar>(fp: S, fs: S) -> Result<HeppTwoStep<S>> {
    check_probability("F_p", &fp)?;
    check_probability("F_s", &fs)?;
    let pass = |f: S| -> S {
        f.clone() * f.clone() + (S::one() - f.clone()) * (S::one() - f)
    };
    let p_pass = pass(fp.clone());
    let s_pass = pass(fs.clone());
    if p_pass.to_f64() <= 0.0 || s_pass.to_f64() <= 0.0 {
        return Err(Error::Domain("degenerate parity-check pass probability".into()));
    }
    let fp_out = fp.clone() * fp / p_pass.clone();
    let fs_out = fs.clone() * fs / s_pass.clone();
    Ok(HeppTwoStep {
        fidelity: fp_out.clone() * fs_out.clone(),
        fp_out,
        fs_out,
        eff_with_qsjm: s_pass.clone(),
        eff_without: p_pass * s_pass,
    })
}
