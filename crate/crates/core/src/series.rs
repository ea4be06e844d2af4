//! Truncated Maclaurin series arithmetic.
//!
//! A [`TruncatedSeries`] of order K holds the coefficients c_0..c_K of
//! z^0..z^K. Every operation keeps the order of its inputs; binary operations
//! require equal orders. Transcendental operations use the first-derivative
//! recurrences (b' = a'b for exp, a b' = α a' b for powers, a b' = a' for log),
//! which cost O(K²).

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("a truncated series needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::numerical("series coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    /// The series `z`.
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    /// Builds a series from the first K+1 terms of a coefficient sequence.
    pub fn from_fn(order: usize, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::from_coeffs((0..=order).map(f).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::domain(format!(
                "series order mismatch: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    fn finite(self) -> Result<Self> {
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::numerical(
                "series arithmetic produced non-finite coefficients",
            ));
        }
        Ok(self)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Self { coeffs }.finite()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Self { coeffs }.finite()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_constant(&self, value: f64) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += value;
        s
    }

    /// Cauchy product truncated at order K.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum();
        }
        Self { coeffs: out }.finite()
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 {
            return Err(Error::domain("reciprocal of a series with zero constant term"));
        }
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Self { coeffs: b }.finite()
    }

    /// a(z)^α for a real exponent; requires a positive constant term.
    pub fn pow_real(&self, alpha: f64) -> Result<Self> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::domain(format!(
                "real power of a series needs a positive constant term, got {a0}"
            )));
        }
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = a0.powf(alpha);
        for k in 1..n {
            let kf = k as f64;
            let s: f64 = (1..=k)
                .map(|j| (alpha * j as f64 - (kf - j as f64)) * self.coeffs[j] * b[k - j])
                .sum();
            b[k] = s / (kf * a0);
        }
        Self { coeffs: b }.finite()
    }

    pub fn exp(&self) -> Result<Self> {
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = self.coeffs[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| j as f64 * self.coeffs[j] * b[k - j])
                .sum();
            b[k] = s / k as f64;
        }
        Self { coeffs: b }.finite()
    }

    /// Natural logarithm; requires a positive constant term.
    pub fn ln(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::domain(format!(
                "logarithm of a series needs a positive constant term, got {a0}"
            )));
        }
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = a0.ln();
        for k in 1..n {
            let s: f64 = (1..k)
                .map(|j| (k - j) as f64 * self.coeffs[j] * b[k - j])
                .sum();
            b[k] = (k as f64 * self.coeffs[k] - s) / (k as f64 * a0);
        }
        Self { coeffs: b }.finite()
    }

    /// outer(inner(z)) by Horner's scheme; `inner` must vanish at the origin.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_order(inner)?;
        if inner.coeffs[0] != 0.0 {
            return Err(Error::domain(
                "composition requires an inner series with zero constant term",
            ));
        }
        let order = self.order();
        let mut acc = Self::constant(self.coeffs[order], order);
        for k in (0..order).rev() {
            acc = acc.mul(inner)?;
            acc.coeffs[0] += self.coeffs[k];
        }
        acc.finite()
    }

    /// Value of the truncated polynomial at a real point.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·z")?,
                _ => write!(f, "{c}·z^{k}")?,
            }
        }
        write!(f, " + O(z^{})", self.order() + 1)
    }
}
