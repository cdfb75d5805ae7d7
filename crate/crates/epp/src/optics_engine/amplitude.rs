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

//! Complex amplitude arithmetic for the Fock-space simulator.
//!
//! Two implementations are provided:
//!
//! * [`Complex64`] — ordinary double-precision complex numbers.
//! * [`ExactAmp`] — exact elements of the ring ℚ(i)[√2, √3], stored as four
//!   Gaussian-rational coefficients on the multiplicative basis
//!   {1, √2, √3, √6}.  This ring is closed under every √n! bosonic
//!   normalization factor up to occupation number 4 per slot
//!   (√2, √6, √24 = 2√6), which covers all protocols in scope.
//!
//! Pump amplitudes √p of the SPDC expansions are supplied as *rational*
//! parameters (the default preset value is √p = 1/10), so source amplitudes
//! such as √(p/2) = √p·√2/2 also stay inside the ring.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Complex amplitude of a Fock-basis component.
///
/// Beyond field arithmetic, the trait exposes multiplication and division by
/// √n (for the bosonic creation/annihilation factors) and a checked
/// conversion of real-valued results back into the probability field
/// [`Scalar`].
pub trait Amplitude:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// The real field probabilities are reported in.
    type Real: Scalar;

    /// Additive identity.
    fn zero() -> Self;

    /// Multiplicative identity.
    fn one() -> Self;

    /// True if the amplitude is exactly (representably) zero.
    fn is_zero(&self) -> bool;

    /// Embeds a real scalar.
    fn from_real(r: Self::Real) -> Self;

    /// The exact ratio `num/den`.
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_real(Self::Real::from_ratio(num, den))
    }

    /// Multiplication by the imaginary unit.
    fn times_i(self) -> Self;

    /// Complex conjugate.
    fn conj(self) -> Self;

    /// Multiplication by √n.
    ///
    /// Fails for the exact ring when the square-free part of `n` is not in
    /// {1, 2, 3, 6} (cannot happen for per-slot occupations ≤ 4).
    fn mul_sqrt(self, n: u32) -> Result<Self>;

    /// Division by √n (same domain restriction as [`Amplitude::mul_sqrt`]).
    fn div_sqrt(self, n: u32) -> Result<Self>;

    /// |z|² as a ring element (always real-valued, possibly irrational).
    fn abs_sqr(self) -> Self {
        self.clone().conj() * self
    }

    /// Extracts a rational-real ring element into the probability field.
    ///
    /// Fails if an imaginary or irrational component survives; every
    /// protocol in scope yields rational probabilities, so a failure here
    /// signals a modelling error (or a protocol that genuinely needs the
    /// floating-point engine).
    fn into_real(self) -> Result<Self::Real>;
}

impl Amplitude for Complex64 {
    type Real = f64;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }

    fn times_i(self) -> Self {
        Complex64::new(-self.im, self.re)
    }

    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }

    fn mul_sqrt(self, n: u32) -> Result<Self> {
        Ok(self * (n as f64).sqrt())
    }

    fn div_sqrt(self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("division by √0".into()));
        }
        Ok(self / (n as f64).sqrt())
    }

    fn into_real(self) -> Result<f64> {
        // Floating-point runs accumulate harmless rounding in the imaginary
        // part; anything larger indicates a real modelling problem.
        if self.im.abs() > 1e-9 * (1.0 + self.re.abs()) {
            return Err(Error::Numeric(format!(
                "probability has imaginary residue {:e}",
                self.im
            )));
        }
        Ok(self.re)
    }
}

type Q = BigRational;
type Qi = num_complex::Complex<Q>;

/// Exact element of ℚ(i)[√2, √3] on the basis {1, √2, √3, √6}.
///
/// `c[0] + c[1]·√2 + c[2]·√3 + c[3]·√6` with Gaussian-rational `c[k]`.
#[derive(Clone, PartialEq, Debug)]
pub struct ExactAmp {
    c: [Qi; 4],
}

/// Index of the product of basis elements i and j, with the rational factor
/// it picks up: eᵢ·eⱼ = MUL_FACTOR·e_MUL_INDEX.
const MUL_INDEX: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
const MUL_FACTOR: [[i64; 4]; 4] = [[1, 1, 1, 1], [1, 2, 1, 2], [1, 1, 3, 3], [1, 2, 3, 6]];

impl ExactAmp {
    fn qi_zero() -> Qi {
        Qi::new(Q::zero(), Q::zero())
    }

    fn from_parts(c: [Qi; 4]) -> Self {
        ExactAmp { c }
    }

    /// Multiplies by the basis element √m, m ∈ {1, 2, 3, 6}.
    fn mul_basis(&self, m: u32) -> Self {
        let j = match m {
            1 => 0,
            2 => 1,
            3 => 2,
            6 => 3,
            _ => unreachable!("mul_basis called with non-basis radicand"),
        };
        let mut out = [Self::qi_zero(), Self::qi_zero(), Self::qi_zero(), Self::qi_zero()];
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            let k = MUL_INDEX[i][j];
            let f = Q::from_integer(BigInt::from(MUL_FACTOR[i][j]));
            out[k] = out[k].clone() + ci.clone() * Qi::new(f, Q::zero());
        }
        ExactAmp::from_parts(out)
    }

    fn scale(&self, q: &Q) -> Self {
        let s = Qi::new(q.clone(), Q::zero());
        ExactAmp::from_parts([
            self.c[0].clone() * s.clone(),
            self.c[1].clone() * s.clone(),
            self.c[2].clone() * s.clone(),
            self.c[3].clone() * s,
        ])
    }

    /// Splits n = s²·m with m square-free; returns (s, m).
    fn sqrt_decompose(n: u32) -> (u32, u32) {
        let mut s = 1u32;
        let mut m = n;
        let mut d = 2u32;
        while d * d <= m {
            while m % (d * d) == 0 {
                m /= d * d;
                s *= d;
            }
            d += 1;
        }
        (s, m)
    }
}

impl Add for ExactAmp {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a = a.clone() + b;
        }
        ExactAmp::from_parts(c)
    }
}

impl Sub for ExactAmp {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a = a.clone() - b;
        }
        ExactAmp::from_parts(c)
    }
}

impl Neg for ExactAmp {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = -a.clone();
        }
        ExactAmp::from_parts(c)
    }
}

impl Mul for ExactAmp {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [
            ExactAmp::qi_zero(),
            ExactAmp::qi_zero(),
            ExactAmp::qi_zero(),
            ExactAmp::qi_zero(),
        ];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = MUL_INDEX[i][j];
                let f = Q::from_integer(BigInt::from(MUL_FACTOR[i][j]));
                out[k] = out[k].clone() + a.clone() * b.clone() * Qi::new(f, Q::zero());
            }
        }
        ExactAmp::from_parts(out)
    }
}

impl Amplitude for ExactAmp {
    type Real = BigRational;

    fn zero() -> Self {
        ExactAmp::from_parts([
            Self::qi_zero(),
            Self::qi_zero(),
            Self::qi_zero(),
            Self::qi_zero(),
        ])
    }

    fn one() -> Self {
        let mut a = <Self as Amplitude>::zero();
        a.c[0] = Qi::new(Q::one(), Q::zero());
        a
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|q| q.is_zero())
    }

    fn from_real(r: BigRational) -> Self {
        let mut a = <Self as Amplitude>::zero();
        a.c[0] = Qi::new(r, Q::zero());
        a
    }

    fn times_i(self) -> Self {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = Qi::new(-a.im.clone(), a.re.clone());
        }
        ExactAmp::from_parts(c)
    }

    fn conj(self) -> Self {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = a.conj();
        }
        ExactAmp::from_parts(c)
    }

    fn mul_sqrt(self, n: u32) -> Result<Self> {
        if n == 0 {
            return Ok(<Self as Amplitude>::zero());
        }
        let (s, m) = Self::sqrt_decompose(n);
        if !matches!(m, 1 | 2 | 3 | 6) {
            return Err(Error::Numeric(format!(
                "√{n} is outside the exact ring ℚ(i)[√2,√3]; \
                 use the floating-point engine for per-slot occupations > 4"
            )));
        }
        let scaled = self.scale(&Q::from_integer(BigInt::from(s)));
        Ok(scaled.mul_basis(m))
    }

    fn div_sqrt(self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("division by √0".into()));
        }
        // 1/√n = √n / n.
        let up = self.mul_sqrt(n)?;
        Ok(up.scale(&Q::new(BigInt::one(), BigInt::from(n))))
    }

    fn into_real(self) -> Result<BigRational> {
        if !self.c[1].is_zero() || !self.c[2].is_zero() || !self.c[3].is_zero() {
            return Err(Error::Numeric(
                "probability has an irrational component".into(),
            ));
        }
        if !self.c[0].im.is_zero() {
            return Err(Error::Numeric(
                "probability has an imaginary component".into(),
            ));
        }
        Ok(self.c[0].re.clone())
    }
}
