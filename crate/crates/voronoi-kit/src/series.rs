//! Laurent series and rational functions in `X = q^{-s}` with complex coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A finite Laurent series `sum_i c[i] X^(lo + i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    pub lo: i32,
    pub c: Vec<Complex64>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent { lo: 0, c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(k: i32, a: Complex64) -> Self {
        Laurent { lo: k, c: vec![a] }
    }

    /// From coefficients `c[i]` of `X^(lo + i)`.
    pub fn new(lo: i32, c: Vec<Complex64>) -> Self {
        Laurent { lo, c }
    }

    /// `1 - a X^k`.
    pub fn one_minus(a: Complex64, k: i32) -> Self {
        Self::one() - Self::monomial(k, a)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|z| *z == ZERO)
    }

    /// Highest exponent carried, `lo - 1` when empty.
    pub fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    pub fn coeff(&self, k: i32) -> Complex64 {
        let i = k - self.lo;
        if i < 0 || i >= self.c.len() as i32 {
            ZERO
        } else {
            self.c[i as usize]
        }
    }

    /// Drops exact zeros at both ends.
    pub fn trim(mut self) -> Self {
        while self.c.last() == Some(&ZERO) {
            self.c.pop();
        }
        let lead = self.c.iter().take_while(|z| **z == ZERO).count();
        if lead == self.c.len() {
            return Self::zero();
        }
        self.c.drain(..lead);
        self.lo += lead as i32;
        self
    }

    /// Lowest exponent with a coefficient of modulus above `tol`.
    pub fn valuation(&self, tol: f64) -> Option<i32> {
        self.c.iter().position(|z| z.norm() > tol).map(|i| self.lo + i as i32)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Laurent { lo: self.lo, c: self.c.iter().map(|z| z * a).collect() }
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: i32) -> Self {
        Laurent { lo: self.lo + k, c: self.c.clone() }
    }

    /// Keeps exponents `<= hi`.
    pub fn truncate(&self, hi: i32) -> Self {
        if hi < self.lo {
            return Self::zero();
        }
        let len = ((hi - self.lo + 1) as usize).min(self.c.len());
        Laurent { lo: self.lo, c: self.c[..len].to_vec() }
    }

    /// Product truncated to exponents `<= hi`.
    pub fn mul_trunc(&self, other: &Self, hi: i32) -> Self {
        if self.c.is_empty() || other.c.is_empty() {
            return Self::zero();
        }
        let lo = self.lo + other.lo;
        if hi < lo {
            return Self::zero();
        }
        let full = self.c.len() + other.c.len() - 1;
        let len = full.min((hi - lo + 1) as usize);
        let mut c = vec![ZERO; len];
        for (i, a) in self.c.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                c[i + j] += a * b;
            }
        }
        Laurent { lo, c }
    }

    /// Formal inverse expanded in ascending powers up to `X^hi`; the lowest coefficient must be nonzero.
    pub fn inverse(&self, hi: i32) -> Result<Self> {
        let s = self.clone().trim();
        if s.c.is_empty() {
            return Err(Error::Expansion("inverse of the zero series".into()));
        }
        let lo = -s.lo;
        if hi < lo {
            return Ok(Self::zero());
        }
        let len = (hi - lo + 1) as usize;
        let a0 = s.c[0];
        let mut b = vec![ZERO; len];
        b[0] = 1.0 / a0;
        for k in 1..len {
            let mut acc = ZERO;
            for j in 1..=k.min(s.c.len() - 1) {
                acc += s.c[j] * b[k - j];
            }
            b[k] = -acc / a0;
            if !b[k].re.is_finite() || !b[k].im.is_finite() {
                return Err(Error::Expansion(format!("coefficient of X^{} overflowed", lo + k as i32)));
            }
        }
        Ok(Laurent { lo, c: b })
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for z in self.c.iter().rev() {
            acc = acc * x + z;
        }
        acc * x.powi(self.lo)
    }

    /// Substitution `X -> q^{-1} X^{-1}`.
    pub fn reflect(&self, q: f64) -> Self {
        if self.c.is_empty() {
            return Self::zero();
        }
        let hi = self.hi();
        let c = (0..self.c.len())
            .map(|i| {
                let k = hi - i as i32;
                self.coeff(k) * q.powi(-k)
            })
            .collect();
        Laurent { lo: -hi, c }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi).map(|k| (self.coeff(k) - other.coeff(k)).norm()).fold(0.0, f64::max)
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, other: &Laurent) -> Laurent {
        if self.c.is_empty() {
            return other.clone();
        }
        if other.c.is_empty() {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let c = (lo..=hi).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Laurent { lo, c }
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(self, other: Laurent) -> Laurent {
        &self + &other
    }
}

impl Neg for Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for Laurent {
    type Output = Laurent;
    fn sub(self, other: Laurent) -> Laurent {
        &self + &(-other)
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, other: &Laurent) -> Laurent {
        self.mul_trunc(other, i32::MAX / 2)
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, other: Laurent) -> Laurent {
        &self * &other
    }
}

/// A quotient of Laurent polynomials in `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    pub num: Laurent,
    pub den: Laurent,
}

impl RationalFunction {
    pub fn new(num: Laurent, den: Laurent) -> Self {
        RationalFunction { num, den }
    }

    pub fn constant(a: Complex64) -> Self {
        Self::new(Laurent::monomial(0, a), Laurent::one())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::new(self.num.scale(a), self.den.clone())
    }

    pub fn shift(&self, k: i32) -> Self {
        Self::new(self.num.shift(k), self.den.clone())
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.num.eval(x) / self.den.eval(x)
    }

    /// Substitution `X -> q^{-1} X^{-1}`.
    pub fn reflect(&self, q: f64) -> Self {
        Self::new(self.num.reflect(q), self.den.reflect(q))
    }

    /// Expansion in ascending powers of `X` up to `X^hi`.
    pub fn expand(&self, hi: i32) -> Result<Laurent> {
        let den = self.den.clone().trim();
        let num = self.num.clone().trim();
        if num.c.is_empty() {
            return Ok(Laurent::zero());
        }
        let inv = den.inverse(hi - num.lo)?;
        Ok(num.mul_trunc(&inv, hi))
    }
}
