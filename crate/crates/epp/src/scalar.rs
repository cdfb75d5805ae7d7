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

//! Scalar abstraction over `f64` and exact rational arithmetic.
//!
//! Every analytic map in this crate is written once, generically over
//! [`Scalar`], so that the same code can be run in floating point for sweeps
//! and in exact `BigRational` arithmetic for the anchors that must hold
//! exactly (e.g. an initial fidelity of 3/4 purifying to exactly 13/14).

use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field of probabilities and fidelities used by the analytic maps.
///
/// Implemented for `f64` (fast, approximate) and [`BigRational`] (exact).
/// Comparisons against tolerances go through [`Scalar::to_f64`]; exact
/// arithmetic simply makes the residuals identically zero.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// The exact ratio `num/den`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossless embedding of an `f64` (every finite float is rational).
    fn from_f64(x: f64) -> Self;

    /// Approximate value, used for tolerance checks and reporting.
    fn to_f64(&self) -> f64;

    /// Absolute value.
    fn abs(&self) -> Self;

    /// True if the representation is exact (no rounding anywhere).
    fn exact() -> bool;
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }

    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn exact() -> bool {
        true
    }
}

/// `|a - b| <= tol`, evaluated in `f64`.
pub fn approx_eq<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    (a.clone() - b.clone()).abs().to_f64() <= tol
}
