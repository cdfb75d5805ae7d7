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

//! Preset protocol wirings and the engine/closed-form cross-check.
//!
//! Each preset is a complete [`ProtocolSpec`] for one of the purification
//! schemes modelled by the analytic tier:
//!
//! * `pan2001` — PBS-based purification of two ideal {Φ⁺, Ψ⁺} pairs.
//! * `pan2003_spdc` — the same circuit fed by two SPDC sources, including
//!   the double-pair emissions that limit the output fidelity.
//! * `nested_repeater` — two elementary links, each built from two SPDC
//!   pairs fused by a CPBS Bell swap, followed by PBS purification.
//! * `spepp` — single-source purification: the second-order four-photon
//!   emission of one spatially-multiplexed SPDC source purifies itself.
//! * `deterministic_epp` — hyperentangled pair whose perfect spatial Bell
//!   state deterministically replaces an arbitrary polarization state.
//! * `single_copy_hyper` — beam-displacer parity check between the
//!   polarization and spatial degrees of freedom of a single pair.
//! * `mbepp_linear` — measurement-based purification: two noisy pairs are
//!   Bell-analyzed against two three-photon resource fragments and the
//!   purified pair appears on the resources' free photons.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::elements::OpticalElement;
use super::protocol::{
    run_protocol, Arm, OutputSpec, PatternAtom, ProtocolSpec, Rational, RawBranch, RawKet,
    SourceSpec, Stage,
};
use super::state::Polarization;

/// All preset names accepted by [`build_preset`].
pub const PRESET_NAMES: [&str; 7] = [
    "pan2001",
    "pan2003_spdc",
    "nested_repeater",
    "spepp",
    "deterministic_epp",
    "single_copy_hyper",
    "mbepp_linear",
];

/// Tunable parameters of the preset protocols.
#[derive(Clone, PartialEq, Debug)]
pub struct PresetParams {
    /// Fidelity F of the noisy polarization pairs (weight of Φ⁺ in the
    /// rank-2 {Φ⁺, Ψ⁺} mixture; 1 − F is the bit-flip probability).
    pub fidelity: Rational,
    /// Spatial-mode fidelity for the hyperentangled presets.
    pub fidelity_spatial: Rational,
    /// SPDC pump amplitude √p (kept rational so exact runs stay exact).
    pub sqrt_p: Rational,
    /// Relative amplitude η of the second SPDC path pair (`spepp`).
    pub eta: Rational,
    /// Relative pump phase ω of the second path pair in 90° units.
    pub omega_quarter_turns: u8,
    /// Full Bell-diagonal weights [Φ⁺, Φ⁻, Ψ⁺, Ψ⁻] for the polarization
    /// mixture, overriding `fidelity` where set (used by
    /// `deterministic_epp`, whose output is independent of them).
    pub bell_weights: Option<[Rational; 4]>,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            fidelity: Rational::new(3, 4),
            fidelity_spatial: Rational::new(3, 4),
            sqrt_p: Rational::new(1, 10),
            eta: Rational::one(),
            omega_quarter_turns: 0,
            bell_weights: None,
        }
    }
}

impl PresetParams {
    fn pol_weights(&self) -> [Rational; 4] {
        self.bell_weights.unwrap_or([
            self.fidelity,
            Rational::zero(),
            self.fidelity.complement(),
            Rational::zero(),
        ])
    }

    fn spatial_weights(&self) -> [Rational; 4] {
        [
            self.fidelity_spatial,
            Rational::zero(),
            self.fidelity_spatial.complement(),
            Rational::zero(),
        ]
    }
}

fn pbs(in1: &str, in2: &str, out1: &str, out2: &str) -> OpticalElement {
    OpticalElement::Pbs {
        in1: in1.into(),
        in2: in2.into(),
        out1: out1.into(),
        out2: out2.into(),
    }
}

fn cpbs(in1: &str, in2: &str, out1: &str, out2: &str) -> OpticalElement {
    OpticalElement::Cpbs {
        in1: in1.into(),
        in2: in2.into(),
        out1: out1.into(),
        out2: out2.into(),
    }
}

fn bd(in1: &str, in2: &str, out1: &str, out2: &str) -> OpticalElement {
    OpticalElement::Bd {
        in1: in1.into(),
        in2: in2.into(),
        out1: out1.into(),
        out2: out2.into(),
    }
}

fn bs(in1: &str, in2: &str, out1: &str, out2: &str) -> OpticalElement {
    OpticalElement::Bs {
        in1: in1.into(),
        in2: in2.into(),
        out1: out1.into(),
        out2: out2.into(),
    }
}

fn hwp(mode: &str) -> OpticalElement {
    OpticalElement::Hwp { mode: mode.into() }
}

fn swap(a: &str, b: &str) -> OpticalElement {
    OpticalElement::Swap {
        a: a.into(),
        b: b.into(),
    }
}

fn slot_exact(mode: &str, polarization: Polarization, count: u8) -> PatternAtom {
    PatternAtom::SlotExact {
        mode: mode.into(),
        polarization,
        count,
    }
}

fn mode_total(mode: &str, count: u8) -> PatternAtom {
    PatternAtom::ModeTotal {
        mode: mode.into(),
        count,
    }
}

fn ideal_pair(alice: &str, bob: &str, weights: [Rational; 4]) -> SourceSpec {
    SourceSpec::IdealPair {
        alice: alice.into(),
        bob: bob.into(),
        weights,
    }
}

fn four_mode_select(modes: [&str; 4]) -> Stage {
    Stage::Select {
        arms: vec![Arm {
            pattern: modes.iter().map(|m| mode_total(m, 1)).collect(),
            remove_matched: false,
            then: vec![],
        }],
    }
}

fn pm_measure(modes: [&str; 2], z_mode: &str) -> Stage {
    Stage::MeasurePairPm {
        modes: [modes[0].into(), modes[1].into()],
        z_correction_mode: z_mode.into(),
    }
}

fn bell_pair_output(alice: &str, bob: &str) -> OutputSpec {
    OutputSpec::BellPair {
        alice: alice.into(),
        bob: bob.into(),
    }
}

/// CPBS Bell swap between paths `in1`/`in2`: project onto a coincidence in
/// the detector paths `u`/`v`, accepting equal-polarization patterns
/// (both transmitted or both reflected in the ± basis).
fn cpbs_swap_stages(in1: &str, in2: &str, u: &str, v: &str) -> [Stage; 2] {
    let detect = |pol: Polarization| Arm {
        pattern: vec![
            slot_exact(u, pol, 1),
            slot_exact(u, pol.flipped(), 0),
            slot_exact(v, pol, 1),
            slot_exact(v, pol.flipped(), 0),
        ],
        remove_matched: true,
        then: vec![],
    };
    [
        Stage::Elements(vec![cpbs(in1, in2, u, v)]),
        Stage::Select {
            arms: vec![detect(Polarization::H), detect(Polarization::V)],
        },
    ]
}

/// Three-photon resource fragment used by `mbepp_linear`, expanded to second
/// order in the pump: free photon on `free`, Bell-analyzer photons on `m1`
/// and `m4`.  Only the genuine three-photon component survives the
/// coincidence selection; the lower-order terms feed the success-probability
/// denominator.
fn resource_kets(m1: &str, m4: &str, free: &str, sqrt_p: &Rational) -> Vec<RawKet> {
    let p = sqrt_p.times(sqrt_p);
    let half = |q: &Rational| Rational::new(q.num, q.den * 2);
    let quarter = |q: &Rational| Rational::new(q.num, q.den * 4);
    let ket = |ratio: Rational, sqrt2_pow: i8, slots: Vec<(&str, Polarization, u8)>| RawKet {
        ratio,
        sqrt2_pow,
        slots: slots
            .into_iter()
            .map(|(m, pol, n)| (m.to_string(), pol, n))
            .collect(),
    };
    vec![
        // First order: one photon toward each Bell analyzer.
        ket(half(sqrt_p), -1, vec![(m1, Polarization::V, 1)]),
        ket(half(sqrt_p), -1, vec![(m4, Polarization::H, 1)]),
        // Second order, one photon in each analyzer path but none free.
        ket(
            quarter(&p),
            0,
            vec![(m1, Polarization::V, 1), (m4, Polarization::H, 1)],
        ),
        // Second order, free photon plus a photon pair in one analyzer path.
        ket(
            p,
            -1,
            vec![
                (free, Polarization::H, 1),
                (m1, Polarization::H, 1),
                (m1, Polarization::V, 1),
            ],
        ),
        ket(
            p,
            -1,
            vec![
                (free, Polarization::V, 1),
                (m4, Polarization::H, 1),
                (m4, Polarization::V, 1),
            ],
        ),
        // Second order, doubled analyzer photon.
        ket(quarter(&p), 0, vec![(m1, Polarization::V, 2)]),
        ket(quarter(&p), 0, vec![(m4, Polarization::H, 2)]),
        // Second order, the operative GHZ-type fragment
        // (|HHH⟩ + |VVV⟩)/√2 across (m1, m4, free).
        ket(
            half(&p),
            -1,
            vec![
                (m1, Polarization::H, 1),
                (m4, Polarization::H, 1),
                (free, Polarization::H, 1),
            ],
        ),
        ket(
            half(&p),
            -1,
            vec![
                (m1, Polarization::V, 1),
                (m4, Polarization::V, 1),
                (free, Polarization::V, 1),
            ],
        ),
    ]
}

fn raw_resource(m1: &str, m4: &str, free: &str, sqrt_p: &Rational) -> SourceSpec {
    SourceSpec::Raw {
        branches: vec![RawBranch {
            weight: Rational::one(),
            kets: resource_kets(m1, m4, free, sqrt_p),
        }],
    }
}

/// Builds the named preset protocol.
pub fn build_preset(name: &str, params: &PresetParams) -> Result<ProtocolSpec> {
    let w = params.pol_weights();
    match name {
        "pan2001" => Ok(ProtocolSpec {
            truncation: 4,
            sources: vec![ideal_pair("a1", "b1", w), ideal_pair("a2", "b2", w)],
            stages: vec![
                Stage::Elements(vec![pbs("a1", "a2", "a3", "a4"), pbs("b1", "b2", "b3", "b4")]),
                four_mode_select(["a3", "a4", "b3", "b4"]),
                pm_measure(["a4", "b4"], "a3"),
            ],
            output: bell_pair_output("a3", "b3"),
        }),
        "pan2003_spdc" => {
            let bitflip = params.fidelity.complement();
            let spdc = |alice: &str, bob: &str| SourceSpec::SpdcPair {
                alice: alice.into(),
                bob: bob.into(),
                sqrt_p: params.sqrt_p,
                bitflip_prob: bitflip,
            };
            Ok(ProtocolSpec {
                truncation: 8,
                sources: vec![spdc("a1", "b1"), spdc("a2", "b2")],
                stages: vec![
                    Stage::Elements(vec![
                        pbs("a1", "a2", "a3", "a4"),
                        pbs("b1", "b2", "b3", "b4"),
                    ]),
                    four_mode_select(["a3", "a4", "b3", "b4"]),
                    pm_measure(["a4", "b4"], "a3"),
                ],
                output: bell_pair_output("a3", "b3"),
            })
        }
        "nested_repeater" => {
            let spdc = |alice: &str, bob: &str| SourceSpec::SpdcPair {
                alice: alice.into(),
                bob: bob.into(),
                sqrt_p: params.sqrt_p,
                bitflip_prob: Rational::zero(),
            };
            let channel_noise = |mode: &str| Stage::Noise {
                probability: params.fidelity.complement(),
                elements: vec![hwp(mode)],
            };
            let mut stages = Vec::new();
            stages.extend(cpbs_swap_stages("m2", "m3", "u1", "v1"));
            stages.push(channel_noise("m4"));
            stages.extend(cpbs_swap_stages("m6", "m7", "u2", "v2"));
            stages.push(channel_noise("m8"));
            stages.push(Stage::Elements(vec![
                pbs("m1", "m5", "a3", "a4"),
                pbs("m4", "m8", "b3", "b4"),
            ]));
            stages.push(four_mode_select(["a3", "a4", "b3", "b4"]));
            stages.push(pm_measure(["a4", "b4"], "a3"));
            Ok(ProtocolSpec {
                truncation: 16,
                sources: vec![
                    spdc("m1", "m2"),
                    spdc("m3", "m4"),
                    spdc("m5", "m6"),
                    spdc("m7", "m8"),
                ],
                stages,
                output: bell_pair_output("a3", "b3"),
            })
        }
        "spepp" => Ok(ProtocolSpec {
            truncation: 4,
            sources: vec![SourceSpec::SpdcHyperFourPhoton {
                alice_paths: ["a1".into(), "a2".into()],
                bob_paths: ["b1".into(), "b2".into()],
                bitflip_prob: params.fidelity.complement(),
                eta: params.eta,
                omega_quarter_turns: params.omega_quarter_turns,
            }],
            stages: vec![
                Stage::Elements(vec![pbs("a1", "a2", "a3", "a4"), pbs("b1", "b2", "b3", "b4")]),
                four_mode_select(["a3", "a4", "b3", "b4"]),
                pm_measure(["a4", "b4"], "a3"),
            ],
            output: bell_pair_output("a3", "b3"),
        }),
        "deterministic_epp" => {
            let route = |x: &str, y: &str, others: [&str; 2], fix: bool| Arm {
                pattern: vec![
                    mode_total(x, 1),
                    mode_total(y, 1),
                    mode_total(others[0], 0),
                    mode_total(others[1], 0),
                ],
                remove_matched: false,
                then: {
                    let mut es = vec![swap(x, "outA"), swap(y, "outB")];
                    if fix {
                        es.push(hwp("outB"));
                    }
                    es
                },
            };
            Ok(ProtocolSpec {
                truncation: 2,
                sources: vec![SourceSpec::HyperPair {
                    alice_paths: ["a1".into(), "a2".into()],
                    bob_paths: ["b1".into(), "b2".into()],
                    pol_weights: w,
                    spatial_weights: [
                        Rational::one(),
                        Rational::zero(),
                        Rational::zero(),
                        Rational::zero(),
                    ],
                }],
                stages: vec![
                    Stage::Elements(vec![
                        hwp("a2"),
                        hwp("b2"),
                        pbs("a1", "a2", "c", "e"),
                        pbs("b1", "b2", "d", "f"),
                    ]),
                    Stage::Select {
                        arms: vec![
                            route("c", "d", ["e", "f"], false),
                            route("e", "f", ["c", "d"], false),
                            route("c", "f", ["e", "d"], true),
                            route("e", "d", ["c", "f"], true),
                        ],
                    },
                ],
                output: bell_pair_output("outA", "outB"),
            })
        }
        "single_copy_hyper" => {
            let route = |x: &str, y: &str, others: [&str; 2]| Arm {
                pattern: vec![
                    mode_total(x, 1),
                    mode_total(y, 1),
                    mode_total(others[0], 0),
                    mode_total(others[1], 0),
                ],
                remove_matched: false,
                then: vec![swap(x, "outA"), swap(y, "outB")],
            };
            Ok(ProtocolSpec {
                truncation: 2,
                sources: vec![SourceSpec::HyperPair {
                    alice_paths: ["a1".into(), "a2".into()],
                    bob_paths: ["b1".into(), "b2".into()],
                    pol_weights: w,
                    spatial_weights: params.spatial_weights(),
                }],
                stages: vec![
                    Stage::Elements(vec![bd("a1", "a2", "D1", "D3"), bd("b1", "b2", "D2", "D4")]),
                    Stage::Select {
                        arms: vec![
                            route("D1", "D2", ["D3", "D4"]),
                            route("D3", "D4", ["D1", "D2"]),
                        ],
                    },
                ],
                output: bell_pair_output("outA", "outB"),
            })
        }
        "mbepp_linear" => {
            let analyzer = |noisy: &str, resource: &str, t: &str, r: &str| {
                bs(noisy, resource, t, r)
            };
            let mut pattern = Vec::new();
            for (t, r) in [("t1", "r1"), ("t2", "r2"), ("t3", "r3"), ("t4", "r4")] {
                pattern.push(slot_exact(t, Polarization::H, 1));
                pattern.push(slot_exact(t, Polarization::V, 1));
                pattern.push(mode_total(r, 0));
            }
            pattern.push(mode_total("g5", 1));
            pattern.push(mode_total("h5", 1));
            Ok(ProtocolSpec {
                truncation: 10,
                sources: vec![
                    ideal_pair("a1", "b1", w),
                    ideal_pair("a2", "b2", w),
                    raw_resource("g1", "g4", "g5", &params.sqrt_p),
                    raw_resource("h1", "h4", "h5", &params.sqrt_p),
                ],
                stages: vec![
                    Stage::Elements(vec![
                        analyzer("a1", "g1", "t1", "r1"),
                        analyzer("a2", "g4", "t2", "r2"),
                        analyzer("b1", "h1", "t3", "r3"),
                        analyzer("b2", "h4", "t4", "r4"),
                    ]),
                    Stage::Select {
                        arms: vec![Arm {
                            pattern,
                            remove_matched: true,
                            then: vec![],
                        }],
                    },
                ],
                output: bell_pair_output("g5", "h5"),
            })
        }
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; known presets: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Closed-form output fidelity of the SPDC-fed PBS purification including
/// double-pair emission: F′ = (F² + 1/4) / (F² + 1/4 + (1−F)²).
pub fn spdc_doublepair_fidelity<S: Scalar>(f: S) -> S {
    let g = S::one() - f.clone();
    let quarter = S::from_ratio(1, 4);
    let num = f.clone() * f + quarter;
    num.clone() / (num + g.clone() * g)
}

/// One grid point of an engine/closed-form comparison.
#[derive(Clone, Debug)]
pub struct VerifyRow {
    /// Swept input fidelity.
    pub fidelity: f64,
    /// Success probability from the Fock-space engine.
    pub engine_success: f64,
    /// Success probability from the closed form (NaN if not compared).
    pub analytic_success: f64,
    /// Output Bell weights from the engine.
    pub engine_weights: [f64; 4],
    /// Output Bell weights from the closed form.
    pub analytic_weights: [f64; 4],
    /// Largest absolute deviation at this grid point.
    pub deviation: f64,
}

/// Result of [`verify_against_analytic`].
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// Preset that was exercised.
    pub preset: String,
    /// Per-grid-point comparison.
    pub rows: Vec<VerifyRow>,
    /// Largest deviation over the whole grid.
    pub max_deviation: f64,
}

impl VerifyReport {
    /// Tolerance shared by all engine/closed-form cross-checks.
    pub const TOLERANCE: f64 = 1e-9;

    /// True if every grid point agreed to within [`Self::TOLERANCE`].
    pub fn passed(&self) -> bool {
        self.max_deviation <= Self::TOLERANCE
    }
}

/// Sweeps the preset's input fidelity over `grid` in the floating-point
/// engine and compares success probability and output Bell weights against
/// `analytic(f) -> (success, weights)`.  An analytic success of `NaN` skips
/// the success comparison (used where the engine conditions on a different
/// denominator, e.g. per-pulse SPDC statistics).
pub fn verify_against_analytic<F>(
    preset: &str,
    params: &PresetParams,
    analytic: F,
    grid: &[f64],
) -> Result<VerifyReport>
where
    F: Fn(f64) -> Result<(f64, [f64; 4])>,
{
    let mut rows = Vec::with_capacity(grid.len());
    let mut max_deviation: f64 = 0.0;
    for &f in grid {
        let mut p = params.clone();
        p.fidelity = Rational::approx_f64(f);
        let spec = build_preset(preset, &p)?;
        let result = run_protocol::<num_complex::Complex64>(&spec)?;
        let (analytic_success, analytic_weights) = analytic(f)?;
        let w = result.output.weights();
        let engine_weights = [w[0], w[1], w[2], w[3]];
        let mut deviation: f64 = 0.0;
        if analytic_success.is_finite() {
            deviation = deviation.max((result.success_prob - analytic_success).abs());
        }
        for (e, a) in engine_weights.iter().zip(&analytic_weights) {
            deviation = deviation.max((e - a).abs());
        }
        max_deviation = max_deviation.max(deviation);
        rows.push(VerifyRow {
            fidelity: f,
            engine_success: result.success_prob,
            analytic_success,
            engine_weights,
            analytic_weights,
            deviation,
        });
    }
    Ok(VerifyReport {
        preset: preset.to_string(),
        rows,
        max_deviation,
    })
}
