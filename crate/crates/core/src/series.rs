//! Truncated power series `Σ cₙ zⁿ`.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub coeffs: Vec<C64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(n, c)| c * n as f64).collect())
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self::new(self.coeffs.iter().take(n).copied().collect())
    }

    /// Product truncated to the length of the shorter factor.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Quotient truncated to the shorter length; needs a nonzero constant term in `other`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let n = self.len().min(other.len());
        let d0 = other.coeff(0);
        if d0.norm() < 1e-14 * other.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300) {
            return Err(Error::CriticalPoint(C64::new(0.0, 0.0)));
        }
        let mut q = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = self.coeff(k);
            for j in 0..k {
                acc -= q[j] * other.coeff(k - j);
            }
            q[k] = acc / d0;
        }
        Ok(Self::new(q))
    }

    pub fn scale(&self, a: C64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * a).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    /// Schwarzian derivative `(f″/f′)′ − ½(f″/f′)²` as a series about the origin.
    pub fn schwarzian(&self) -> Result<Self> {
        let d1 = self.derivative();
        let d2 = d1.derivative();
        let u = d2.div(&d1)?;
        let du = u.derivative();
        let half_u2 = u.mul(&u).scale(C64::new(0.5, 0.0));
        Ok(du.truncated(du.len().min(half_u2.len())).sub(&half_u2.truncated(du.len())))
    }

    /// Coefficients with `cₙ ↦ conj(cₙ)`, i.e. the series of `conj(f(z̄))`.
    pub fn reflected(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }
}
