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

//! Two-tier simulator for entanglement purification protocols.
//!
//! The crate has an *analytic* tier and an *oracle* tier:
//!
//! * the analytic tier ([`bell_core`], [`multipartite`], [`hyper_epp`],
//!   [`mbepp`]) implements every purification map as an exact transformation
//!   on Bell- or GHZ-diagonal mixtures, generic over floating-point or
//!   rational arithmetic;
//! * the oracle tier ([`optics_engine`]) is a sparse Fock-space simulator of
//!   polarization/spatial-mode linear optics (sources, beam splitters,
//!   detection-pattern postselection) that re-derives the same maps by
//!   brute-force enumeration, so every closed form can be cross-checked
//!   against an independent physical model.
//!
//! [`verify`] bundles the cross-checks; the `epp` binary exposes everything
//! on the command line.
//!
//! # Example
//!
//! ```
//! use epp::bell_core::{make_werner, bbpssw_round};
//!
//! let state = make_werner(0.7f64).unwrap();
//! let round = bbpssw_round(&state).unwrap();
//! assert!((round.success_prob - 0.68).abs() < 1e-12);
//! assert!(round.output.fidelity() > 0.7);
//! ```

pub mod bell_core;
pub mod error;
pub mod hyper_epp;
pub mod mbepp;
pub mod multipartite;
pub mod optics_engine;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
