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

//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by state constructors, protocol maps, and the optics
/// engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its mathematical domain (probability outside
    /// [0,1], unnormalized mixture, singular parameter set, …).
    #[error("domain error: {0}")]
    Domain(String),

    /// A protocol map received a mixture outside the support it is defined
    /// on (e.g. the PBS protocol only removes cross terms of rank-2
    /// {Φ⁺, Ψ⁺} mixtures).
    #[error("unsupported mixture: {0}")]
    UnsupportedMixture(String),

    /// A protocol description references unknown modes, an unknown preset,
    /// or is otherwise malformed.
    #[error("configuration error: {0}")]
    Config(String),

    /// An optical operation would create more photons than the configured
    /// Fock-space truncation allows.
    #[error("truncation exceeded: state requires {required} photons but the truncation is {truncation}")]
    Truncation { required: usize, truncation: usize },

    /// Exact arithmetic produced a quantity that is not rational where a
    /// probability was required (should not happen for in-scope protocols).
    #[error("numeric error: {0}")]
    Numeric(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
