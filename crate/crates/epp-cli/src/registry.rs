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

//! Protocol registry: every id listed by `epp list` is runnable by
//! `epp run` and sweepable by `epp sweep`.
//!
//! Analytic ids evaluate the closed-form maps; the preset ids (`pan2001`,
//! `pan2003_spdc`, …) run the sparse Fock-space engine on the corresponding
//! optical circuit.  Each protocol declares its parameters (with defaults)
//! and a fixed output-column schema; a result row is the declared inputs in
//! order followed by the outputs in order.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};

use epp::bell_core::{bbpssw_round, dejmps_round, make_werner, pan_pbs_round, BellDiagonalState};
use epp::hyper_epp::{hepp_two_step, qnd_spdc_fidelity, single_copy_round};
use epp::mbepp::{
    logical_f2, logical_pg, logical_pg_imperfect, mbepp_round_physical, mc_logical_pg, LossModel,
    QndErrorModel, QpcParams,
};
use epp::multipartite::dmepp_curves;
use epp::optics_engine::{
    build_preset, run_protocol, spdc_doublepair_fidelity, Complex64, PresetParams, Rational,
};

/// Parameter values for one evaluation, keyed by parameter name.
pub type Params = BTreeMap<String, f64>;

/// Seed/sample budget forwarded to Monte Carlo protocols.
#[derive(Clone, Copy, Debug)]
pub struct RunCtx {
    pub seed: u64,
    pub samples: u64,
}

/// One runnable protocol.
pub struct Protocol {
    /// Identifier used by `--protocol`.
    pub name: &'static str,
    /// One-line description shown by `list`.
    pub about: &'static str,
    /// Declared parameters with defaults.
    pub params: &'static [(&'static str, f64)],
    /// Output column names (appended to the inputs in every row).
    pub columns: &'static [&'static str],
    eval: fn(&Params, &RunCtx) -> Result<Vec<f64>>,
}

impl Protocol {
    /// Evaluates the protocol, returning the output columns.
    pub fn eval(&self, params: &Params, ctx: &RunCtx) -> Result<Vec<f64>> {
        (self.eval)(params, ctx)
    }

    /// Merges defaults with user overrides, rejecting unknown names.
    pub fn resolve_params(&self, overrides: &Params) -> Result<Params> {
        for name in overrides.keys() {
            if !self.params.iter().any(|(p, _)| p == name) {
                bail!(
                    "protocol {} has no parameter {name:?} (available: {})",
                    self.name,
                    self.params
                        .iter()
                        .map(|(p, _)| *p)
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
        }
        Ok(self
            .params
            .iter()
            .map(|(p, d)| {
                (
                    p.to_string(),
                    overrides.get(*p).copied().unwrap_or(*d),
                )
            })
            .collect())
    }
}

fn get(params: &Params, name: &str) -> f64 {
    *params.get(name).expect("resolved parameter")
}

fn get_usize(params: &Params, name: &str) -> Result<usize> {
    let x = get(params, name);
    if x.fract() != 0.0 || !(0.0..=64.0).contains(&x) {
        bail!("parameter {name} must be a small non-negative integer, got {x}");
    }
    Ok(x as usize)
}

fn rank2(f: f64) -> Result<BellDiagonalState<f64>> {
    BellDiagonalState::new([f, 0.0, 1.0 - f, 0.0])
        .with_context(|| format!("invalid fidelity {f}"))
}

fn run_preset_row(preset: &'static str, params: &Params, _ctx: &RunCtx) -> Result<Vec<f64>> {
    let mut p = PresetParams::default();
    if params.contains_key("F") {
        p.fidelity = Rational::approx_f64(get(params, "F"));
    }
    if params.contains_key("Fs") {
        p.fidelity_spatial = Rational::approx_f64(get(params, "Fs"));
    }
    if params.contains_key("sqrt_p") {
        p.sqrt_p = Rational::approx_f64(get(params, "sqrt_p"));
    }
    if params.contains_key("eta") {
        p.eta = Rational::approx_f64(get(params, "eta"));
    }
    if params.contains_key("omega") {
        let q = get(params, "omega");
        if q.fract() != 0.0 || !(0.0..4.0).contains(&q) {
            bail!("omega must be an integer number of quarter turns in 0..4, got {q}");
        }
        p.omega_quarter_turns = q as u8;
    }
    let spec = build_preset(preset, &p).map_err(|e| anyhow!("{e}"))?;
    let r = run_protocol::<Complex64>(&spec).map_err(|e| anyhow!("{e}"))?;
    let w = r.output.weights();
    Ok(vec![r.success_prob, w[0], w[1], w[2], w[3]])
}

const PRESET_COLUMNS: &[&str] = &[
    "success",
    "w_phi_plus",
    "w_phi_minus",
    "w_psi_plus",
    "w_psi_minus",
];

macro_rules! preset_eval {
    ($name:literal) => {
        |p: &Params, c: &RunCtx| run_preset_row($name, p, c)
    };
}

/// The full protocol table.
pub static PROTOCOLS: &[Protocol] = &[
    // ---- analytic closed forms -------------------------------------------
    Protocol {
        name: "bbpssw",
        about: "CNOT purification of a Werner state (closed form)",
        params: &[("F", 0.75)],
        columns: &["F_out", "success"],
        eval: |p, _| {
            let r = bbpssw_round(&make_werner(get(p, "F"))?)?;
            Ok(vec![r.output.fidelity(), r.success_prob])
        },
    },
    Protocol {
        name: "dejmps",
        about: "rotated CNOT purification of a Bell-diagonal mixture (closed form)",
        params: &[("w1", 0.7), ("w2", 0.3), ("w3", 0.0), ("w4", 0.0)],
        columns: &["F_out", "success"],
        eval: |p, _| {
            let state = BellDiagonalState::new([
                get(p, "w1"),
                get(p, "w2"),
                get(p, "w3"),
                get(p, "w4"),
            ])?;
            let r = dejmps_round(&state)?;
            Ok(vec![r.output.fidelity(), r.success_prob])
        },
    },
    Protocol {
        name: "pan_pbs",
        about: "PBS parity-check purification of two {Φ⁺,Ψ⁺} pairs (closed form)",
        params: &[("F", 0.75)],
        columns: &["F_out", "success"],
        eval: |p, _| {
            let r = pan_pbs_round(&rank2(get(p, "F"))?)?;
            Ok(vec![r.output.fidelity(), r.success_prob])
        },
    },
    Protocol {
        name: "pan_spdc_doublepair",
        about: "PBS purification fed by SPDC including double pairs (closed-form fidelity)",
        params: &[("F", 0.75)],
        columns: &["F_out"],
        eval: |p, _| Ok(vec![spdc_doublepair_fidelity(get(p, "F"))]),
    },
    Protocol {
        name: "single_copy",
        about: "single-copy hyperentanglement parity check (closed form)",
        params: &[("Fp", 0.8), ("Fs", 0.7)],
        columns: &["F_n", "success"],
        eval: |p, _| {
            let r = single_copy_round(get(p, "Fp"), get(p, "Fs"))?;
            Ok(vec![r.output.fidelity(), r.success_prob])
        },
    },
    Protocol {
        name: "hepp_two_step",
        about: "two-copy hyperentanglement purification with state-joining recycling",
        params: &[("Fp", 0.8), ("Fs", 0.7)],
        columns: &["Fp_out", "Fs_out", "F_out", "eff_with_qsjm", "eff_without"],
        eval: |p, _| {
            let r = hepp_two_step(get(p, "Fp"), get(p, "Fs"))?;
            Ok(vec![r.fp_out, r.fs_out, r.fidelity, r.eff_with_qsjm, r.eff_without])
        },
    },
    Protocol {
        name: "qnd_spdc",
        about: "QND-heralded purification of an SPDC source with pump p (closed form)",
        params: &[("p", 0.1), ("F", 0.75)],
        columns: &["F_out"],
        eval: |p, _| Ok(vec![qnd_spdc_fidelity(get(p, "p"), get(p, "F"))?]),
    },
    Protocol {
        name: "dmepp_curves",
        about: "GHZ purification with recycled Bell pairs vs conventional (four closed forms)",
        params: &[("F", 0.75)],
        columns: &[
            "eff_conventional",
            "eff_recycling",
            "fid_conventional",
            "fid_recycling",
        ],
        eval: |p, _| {
            let c = dmepp_curves(get(p, "F"));
            Ok(vec![c.eff_a, c.eff_b, c.fid_conv, c.fid_dmepp])
        },
    },
    Protocol {
        name: "mbepp_physical",
        about: "measurement-based purification of two {Φ⁺,Ψ⁺} pairs (closed form)",
        params: &[("F", 0.75)],
        columns: &["F_out", "success"],
        eval: |p, _| {
            let f = get(p, "F");
            let r = mbepp_round_physical(&rank2(f)?, &rank2(f)?)?;
            Ok(vec![r.output.fidelity(), r.success_prob])
        },
    },
    Protocol {
        name: "logical_pg",
        about: "logical-level success probability under photon loss (exact combinatorics)",
        params: &[("n", 2.0), ("m", 2.0), ("eta", 0.8), ("F", 0.85)],
        columns: &["P_g"],
        eval: |p, _| {
            let qpc = QpcParams::new(get_usize(p, "n")?, get_usize(p, "m")?)?;
            let loss = LossModel { eta: get(p, "eta") };
            Ok(vec![logical_pg(&qpc, &loss, get(p, "F"))?])
        },
    },
    Protocol {
        name: "logical_f2",
        about: "logical output fidelity with imperfect physical parity checks",
        params: &[("n", 2.0), ("m", 2.0), ("F", 0.85), ("Pe", 0.1)],
        columns: &["F2"],
        eval: |p, _| {
            let qpc = QpcParams::new(get_usize(p, "n")?, get_usize(p, "m")?)?;
            let qnd = QndErrorModel { pe: get(p, "Pe") };
            Ok(vec![logical_f2(&qpc, get(p, "F"), &qnd)?])
        },
    },
    Protocol {
        name: "logical_pg_imperfect",
        about: "logical success probability with loss and parity-check errors",
        params: &[
            ("n", 2.0),
            ("m", 2.0),
            ("eta", 0.8),
            ("F", 0.85),
            ("Pe", 0.1),
        ],
        columns: &["Pg_prime", "F2"],
        eval: |p, _| {
            let qpc = QpcParams::new(get_usize(p, "n")?, get_usize(p, "m")?)?;
            let loss = LossModel { eta: get(p, "eta") };
            let qnd = QndErrorModel { pe: get(p, "Pe") };
            Ok(vec![
                logical_pg_imperfect(&qpc, &loss, get(p, "F"), &qnd)?,
                logical_f2(&qpc, get(p, "F"), &qnd)?,
            ])
        },
    },
    Protocol {
        name: "logical_pg_mc",
        about: "Monte Carlo estimate of the logical success probability (uses --seed/--samples)",
        params: &[
            ("n", 2.0),
            ("m", 2.0),
            ("eta", 0.8),
            ("F", 0.85),
            ("Pe", 0.0),
        ],
        columns: &["Pg_estimate", "std_error"],
        eval: |p, ctx| {
            let qpc = QpcParams::new(get_usize(p, "n")?, get_usize(p, "m")?)?;
            let loss = LossModel { eta: get(p, "eta") };
            let qnd = QndErrorModel { pe: get(p, "Pe") };
            let est = mc_logical_pg(
                &qpc,
                &loss,
                get(p, "F"),
                Some(&qnd),
                ctx.samples,
                ctx.seed,
            )?;
            Ok(vec![est.value, est.std_error])
        },
    },
    // ---- Fock-space engine presets ---------------------------------------
    Protocol {
        name: "pan2001",
        about: "Fock-space engine: PBS purification of two ideal pairs",
        params: &[("F", 0.75)],
        columns: PRESET_COLUMNS,
        eval: preset_eval!("pan2001"),
    },
    Protocol {
        name: "pan2003_spdc",
        about: "Fock-space engine: PBS purification fed by SPDC with double pairs",
        params: &[("F", 0.75), ("sqrt_p", 0.1)],
        columns: PRESET_COLUMNS,
        eval: preset_eval!("pan2003_spdc"),
    },
    Protocol {
        name: "nested_repeater",
        about: "Fock-space engine: two CPBS-swapped SPDC links, then PBS purification",
        params: &[("F", 0.75), ("sqrt_p", 0.1)],
        columns: PRESET_COLUMNS,
        eval: preset_eval!("nested_repeater"),
    },
    Protocol {
        name: "spepp",
        about: "Fock-space engine: single-source four-photon purification",
        params: &[("F", 0.75), ("eta", 1.0), ("omega", 0.0)],
        columns: PRESET_COLUMNS,
        eval: preset_eval!("spepp"),
    },
    Protocol {
        name: "deterministic_epp",
        about: "Fock-space engine: deterministic purification from spatial entanglement",
        params: &[("F", 0.75)],
        columns: PRESET_COLUMNS,
        eval: preset_eval!("deterministic_epp"),
    },
    Protocol {
        name: "single_copy_hyper",
        about: "Fock-space engine: single-copy beam-displacer parity check",
        params: &[("F", 0.8), ("Fs", 0.7)],
        columns: PRESET_COLUMNS,
        eval: preset_eval!("single_copy_hyper"),
    },
    Protocol {
        name: "mbepp_linear",
        about: "Fock-space engine: twelve-mode measurement-based purification",
        params: &[("F", 0.75), ("sqrt_p", 0.1)],
        columns: PRESET_COLUMNS,
        eval: preset_eval!("mbepp_linear"),
    },
];

/// Looks up a protocol by id.
pub fn find(name: &str) -> Result<&'static Protocol> {
    PROTOCOLS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| {
            anyhow!(
                "unknown protocol {name:?}; run `epp list` to see the {} available ids",
                PROTOCOLS.len()
            )
        })
}
