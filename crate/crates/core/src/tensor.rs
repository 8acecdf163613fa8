//! Real symmetric 2-tensors written as `Re(q dz²) + e |dz|²`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TensorSample {
    /// Twice the `dz²` coefficient.
    pub q: C64,
    /// The `dz dz̄` coefficient.
    pub e: f64,
}

impl TensorSample {
    pub const ZERO: TensorSample = TensorSample { q: C64 { re: 0.0, im: 0.0 }, e: 0.0 };

    pub fn new(q: C64, e: f64) -> Self {
        Self { q, e }
    }

    pub fn conformal(e: f64) -> Self {
        Self { q: C64::new(0.0, 0.0), e }
    }

    pub fn dz2(&self) -> C64 {
        0.5 * self.q
    }

    pub fn dzbar2(&self) -> C64 {
        0.5 * self.q.conj()
    }

    pub fn dzdzbar(&self) -> f64 {
        self.e
    }

    /// Components `[xx, xy, yy]` in real coordinates.
    pub fn to_matrix(&self) -> [f64; 3] {
        [self.q.re + self.e, -self.q.im, -self.q.re + self.e]
    }

    pub fn from_matrix(m: [f64; 3]) -> Self {
        let [xx, xy, yy] = m;
        Self { q: C64::new(0.5 * (xx - yy), -xy), e: 0.5 * (xx + yy) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { q: self.q * s, e: self.e * s }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { q: self.q + o.q, e: self.e + o.e }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { q: self.q - o.q, e: self.e - o.e }
    }

    /// Inner product with respect to the conformal metric `ρ |dz|²`.
    pub fn inner(&self, o: &Self, rho: f64) -> f64 {
        2.0 * ((self.q * o.q.conj()).re + self.e * o.e) / (rho * rho)
    }
}
