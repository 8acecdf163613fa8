//! Möbius transformations with unit determinant.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A 2×2 complex matrix `[[a, b], [c, d]]` with `ad − bc = 1`, acting as `z ↦ (az+b)/(cz+d)`.
///
/// Matrices are defined up to a global sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

/// Image of a point under a Möbius map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MoebiusImage {
    Finite { value: C64, derivative: C64 },
    /// The point is the pole `−d/c`.
    PointAtInfinity,
}

impl MoebiusImage {
    pub fn finite(self) -> Option<(C64, C64)> {
        match self {
            MoebiusImage::Finite { value, derivative } => Some((value, derivative)),
            MoebiusImage::PointAtInfinity => None,
        }
    }
}

impl MoebiusMap {
    /// Builds a map and rescales it to unit determinant.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.norm() > 1e-300) || !det.is_finite() {
            return Err(Error::Degenerate(det));
        }
        let s = det.sqrt().inv();
        Ok(Self { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self { a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0), c: C64::new(0.0, 0.0), d: C64::new(1.0, 0.0) }
    }

    /// Cayley map from the upper half-plane onto the unit disk, `z ↦ (z − i)/(z + i)`.
    pub fn cayley() -> Self {
        Self::new(C64::new(1.0, 0.0), -I, C64::new(1.0, 0.0), I).expect("cayley matrix is invertible")
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: C64) -> MoebiusImage {
        let den = self.c * z + self.d;
        let scale = self.c.norm() * z.norm() + self.d.norm();
        if den.norm() <= 1e-15 * scale.max(1e-300) {
            return MoebiusImage::PointAtInfinity;
        }
        let inv = den.inv();
        MoebiusImage::Finite { value: (self.a * z + self.b) * inv, derivative: inv * inv }
    }

    /// Convenience wrapper returning `(A z, A'(z))`; fails at the pole.
    pub fn apply_finite(&self, z: C64) -> Result<(C64, C64)> {
        self.apply(z).finite().ok_or(Error::Domain(z))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `M⁻¹ ∘ self ∘ M`, i.e. the same transformation expressed in the coordinate `w = M⁻¹ z`.
    pub fn conjugate_by(&self, m: &Self) -> Self {
        m.inverse().compose(self).compose(m)
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// Distance between matrices, minimized over the sign ambiguity.
    pub fn distance(&self, other: &Self) -> f64 {
        let plus = (self.a - other.a).norm() + (self.b - other.b).norm() + (self.c - other.c).norm() + (self.d - other.d).norm();
        let minus = (self.a + other.a).norm() + (self.b + other.b).norm() + (self.c + other.c).norm() + (self.d + other.d).norm();
        plus.min(minus)
    }

    /// Fixes the sign so that the first nonzero entry has positive real part, then rounds
    /// entries to a lattice of spacing `quantum`. Equal keys mean equal transformations.
    pub fn sign_normalized(&self) -> Self {
        let entries = [self.a, self.b, self.c, self.d];
        let lead = entries.iter().find(|e| e.norm() > 1e-9).copied().unwrap_or(C64::new(1.0, 0.0));
        let flip = lead.re < 0.0 || (lead.re.abs() <= 1e-9 && lead.im < 0.0);
        if flip {
            Self { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            *self
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let s = self.sign_normalized();
        [s.a, s.b, s.c, s.d].iter().all(|e| e.im.abs() <= tol)
    }
}

impl std::ops::Mul for MoebiusMap {
    type Output = MoebiusMap;
    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn spot_values() {
        let z = c(2.0, 1.0);
        let (w, _) = MoebiusMap::identity().apply_finite(z).unwrap();
        assert_eq!(w, z);
        let t = MoebiusMap::from_real(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((t.apply_finite(I).unwrap().0 - c(1.0, 1.0)).norm() < 1e-15);
        let s = MoebiusMap::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        assert!((s.apply_finite(I).unwrap().0 - I).norm() < 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        let s = MoebiusMap::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(s.apply(c(0.0, 0.0)), MoebiusImage::PointAtInfinity);
    }

    #[test]
    fn cayley_sends_i_to_origin() {
        let (w, _) = MoebiusMap::cayley().apply_finite(I).unwrap();
        assert!(w.norm() < 1e-15);
    }

    #[test]
    fn degenerate_rejected() {
        assert!(MoebiusMap::from_real(1.0, 2.0, 2.0, 4.0).is_err());
    }

    fn real_map() -> impl Strategy<Value = MoebiusMap> {
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
            .prop_filter("invertible", |(a, b, c, d)| (a * d - b * c).abs() > 0.2)
            .prop_map(|(a, b, c, d)| {
                let (a, b) = if a * d - b * c < 0.0 { (-a, -b) } else { (a, b) };
                MoebiusMap::from_real(a, b, c, d).unwrap()
            })
    }

    proptest! {
        #[test]
        fn unit_determinant(m in real_map()) {
            prop_assert!((m.det() - 1.0).norm() < 1e-12);
        }

        #[test]
        fn inverse_is_identity(m in real_map()) {
            prop_assert!(m.compose(&m.inverse()).distance(&MoebiusMap::identity()) < 1e-12);
        }

        #[test]
        fn composition_associative(a in real_map(), b in real_map(), c in real_map()) {
            let l = (a * b) * c;
            let r = a * (b * c);
            let scale = 1.0 + l.a.norm() + l.b.norm() + l.c.norm() + l.d.norm();
            prop_assert!(l.distance(&r) < 1e-12 * scale);
        }

        #[test]
        fn derivative_matches_difference_quotient(m in real_map(), x in -2.0f64..2.0, y in 0.1f64..2.0) {
            let z = C64::new(x, y);
            let (w, dw) = m.apply_finite(z).unwrap();
            let h = 1e-5;
            let (wp, _) = m.apply_finite(z + h).unwrap();
            let (wm, _) = m.apply_finite(z - h).unwrap();
            let fd = (wp - wm) / (2.0 * h);
            prop_assert!((fd - dw).norm() < 1e-5 * (1.0 + dw.norm()));
            prop_assert!(w.im > 0.0);
        }
    }
}
