use super::group::FuchsianGroup;
use crate::error::{Error, Result};
use crate::moebius::MoebiusMap;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::sync::Arc;

/// Truncated group sum shared by every differential built over the same group and cutoff.
#[derive(Clone, Debug)]
pub struct SeriesTerms {
    pub group: Arc<FuchsianGroup>,
    pub cutoff: usize,
    pub elements: Arc<Vec<MoebiusMap>>,
    pub offsets: Vec<usize>,
}

impl SeriesTerms {
    pub fn new(group: Arc<FuchsianGroup>, cutoff: usize) -> Self {
        let (elements, offsets) = group.enumerate(cutoff);
        Self { group, cutoff, elements: Arc::new(elements), offsets }
    }

    /// Terms up to a smaller cutoff.
    fn prefix(&self, cutoff: usize) -> &[MoebiusMap] {
        let end = self.offsets.get(cutoff + 1).copied().unwrap_or(self.elements.len());
        &self.elements[..end]
    }
}

/// Automorphy diagnostics of a truncated series.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AutomorphyReport {
    /// `sup |φ(Az)A'(z)² − φ(z)|` over sample points and generators.
    pub residual: f64,
    /// Residual divided by `sup |φ|` on the samples.
    pub relative: f64,
    pub sup: f64,
    /// Absolute residuals at cutoffs `cutoff-2, cutoff-1, cutoff` (as available).
    pub history: Vec<f64>,
}

/// Holomorphic quadratic differential `φ(z) = Σ_A p(Az) A'(z)²` on the disk.
///
/// The seed `p` is a polynomial in the disk coordinate.
#[derive(Clone, Debug)]
pub struct QuadDifferential {
    pub seed: Vec<C64>,
    pub terms: SeriesTerms,
    pub automorphy: AutomorphyReport,
}

fn horner(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn sum_terms(p: &[C64], terms: &[MoebiusMap], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for a in terms {
        if let Some((w, dw)) = a.apply(z).finite() {
            acc += horner(p, w) * dw * dw;
        }
    }
    acc
}

fn automorphy(seed: &[C64], terms: &[MoebiusMap], group: &FuchsianGroup) -> (f64, f64) {
    let pts = group.sample_points();
    let gens = group.generators_with_inverses();
    pts.par_iter()
        .map(|&z| {
            let base = sum_terms(seed, terms, z);
            let mut worst = 0.0f64;
            for g in &gens {
                let (w, dw) = g.apply_finite(z).expect("generator is finite on the disk");
                let moved = sum_terms(seed, terms, w) * dw * dw;
                worst = worst.max((moved - base).norm());
            }
            (worst, base.norm())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

/// Residuals at or below this fraction of the seed scale count as exact.
const RESIDUAL_FLOOR: f64 = 1e-13;

/// Builds the truncated Poincaré series of `seed` and checks that the automorphy
/// residual decreases over the last three cutoffs.
pub fn poincare_series(seed: &[C64], terms: &SeriesTerms) -> Result<QuadDifferential> {
    let group = &terms.group;
    let start = terms.cutoff.saturating_sub(2);
    let mut history = Vec::new();
    let mut sup = 0.0;
    for c in start..=terms.cutoff {
        let (r, s) = automorphy(seed, terms.prefix(c), group);
        history.push(r);
        sup = s;
    }
    let scale = sup.max(seed.iter().map(|c| c.norm()).fold(0.0, f64::max));
    let floor = RESIDUAL_FLOOR * scale.max(1e-300);
    if history.len() == 3 && history[2] > floor && history[2] >= history[1] && history[1] >= history[0] {
        return Err(Error::Divergence { residuals: history });
    }
    let residual = *history.last().unwrap_or(&0.0);
    let relative = if sup > 0.0 { residual / sup } else { 0.0 };
    Ok(QuadDifferential {
        seed: seed.to_vec(),
        terms: terms.clone(),
        automorphy: AutomorphyReport { residual, relative, sup, history },
    })
}

impl QuadDifferential {
    pub fn group(&self) -> &Arc<FuchsianGroup> {
        &self.terms.group
    }

    /// Value in the disk coordinate.
    pub fn eval(&self, z: C64) -> C64 {
        sum_terms(&self.seed, &self.terms.elements, z)
    }

    /// Value in the upper half-plane coordinate `w = C⁻¹(z)`.
    pub fn eval_upper(&self, w: C64) -> Result<C64> {
        let (z, dz) = MoebiusMap::cayley().apply_finite(w)?;
        Ok(self.eval(z) * dz * dz)
    }

    /// Linear combination `a·self + b·other` over the same truncation.
    pub fn combine(&self, a: C64, other: &QuadDifferential, b: C64) -> Result<QuadDifferential> {
        if !self.group().same_as(other.group()) || self.terms.cutoff != other.terms.cutoff {
            return Err(Error::Structural("differentials live over different groups or truncations".into()));
        }
        let n = self.seed.len().max(other.seed.len());
        let get = |p: &[C64], k: usize| p.get(k).copied().unwrap_or_default();
        let seed: Vec<C64> = (0..n).map(|k| a * get(&self.seed, k) + b * get(&other.seed, k)).collect();
        let r = a.norm() * self.automorphy.residual + b.norm() * other.automorphy.residual;
        Ok(QuadDifferential {
            seed,
            terms: self.terms.clone(),
            automorphy: AutomorphyReport {
                residual: r,
                relative: self.automorphy.relative.max(other.automorphy.relative),
                sup: a.norm() * self.automorphy.sup + b.norm() * other.automorphy.sup,
                history: Vec::new(),
            },
        })
    }

    pub fn scaled(&self, a: C64) -> QuadDifferential {
        let mut out = self.clone();
        for c in &mut out.seed {
            *c *= a;
        }
        out.automorphy.residual *= a.norm();
        out.automorphy.sup *= a.norm();
        out.automorphy.history.iter_mut().for_each(|r| *r *= a.norm());
        out
    }
}

/// Seeds `z^k` for the listed exponents, each multiplied by `1` and by `i`.
pub fn monomial_seeds(exponents: &[usize]) -> Vec<Vec<C64>> {
    let mut out = Vec::new();
    for &k in exponents {
        for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let mut s = vec![C64::new(0.0, 0.0); k + 1];
            s[k] = unit;
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn trivial_group_returns_seed() {
        let t = SeriesTerms::new(Arc::new(FuchsianGroup::trivial()), 5);
        let seed = vec![c(1.0, 0.5), c(0.0, 0.0), c(-2.0, 0.0)];
        let q = poincare_series(&seed, &t).unwrap();
        let z = c(0.3, -0.4);
        assert_eq!(q.eval(z), horner(&seed, z));
        assert_eq!(q.automorphy.residual, 0.0);
    }

    #[test]
    fn octagon_residual_decreases() {
        let g = Arc::new(FuchsianGroup::octagon());
        let t = SeriesTerms::new(g, 4);
        let q = poincare_series(&[c(1.0, 0.0)], &t).unwrap();
        let h = &q.automorphy.history;
        assert!(h[2] < h[1] && h[1] < h[0], "{h:?}");
    }

    #[test]
    fn cyclic_series_is_automorphic() {
        let g = Arc::new(FuchsianGroup::cyclic(3.0));
        let t = SeriesTerms::new(g, 12);
        let q = poincare_series(&[c(1.0, 0.0), c(0.5, -0.2), c(0.0, 0.3)], &t).unwrap();
        assert!(q.automorphy.relative < 1e-12, "{:?}", q.automorphy);
    }

    #[test]
    fn non_discrete_rotation_group_is_divergent() {
        let (c1, s1) = (0.025f64.cos(), 0.025f64.sin());
        let rot = MoebiusMap::from_real(c1, s1, -s1, c1).unwrap();
        let group = FuchsianGroup::new("rotation", vec![rot], super::super::FundamentalDomain::Disk).unwrap();
        let t = SeriesTerms::new(Arc::new(group), 6);
        let r = poincare_series(&[c(1.0, 0.0)], &t);
        assert!(matches!(r, Err(Error::Divergence { .. })), "{r:?}");
    }
}
