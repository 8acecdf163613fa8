use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Conformal factor near a rank-1 cusp, sampled on `v ∈ (0, v_max]` (decreasing) times a
/// uniform grid of the period `w ∈ [0, ½)`. With `v = e^{−s}`, `φ(s,w) = ψ(e^{−s}, w)`.
#[derive(Clone, Debug)]
pub struct CuspProfile {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `psi[i][j] = ψ(v[i], w[j])`.
    pub psi: Vec<Vec<f64>>,
    /// `lim_{v→0} ψ`.
    pub r_inf: f64,
}

impl CuspProfile {
    /// Samples `ψ` on `count` log-spaced values of `v` from `v_max` down to `v_min` and `nw`
    /// points of the period.
    pub fn from_fn(v_max: f64, v_min: f64, count: usize, nw: usize, r_inf: f64, psi: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !(v_min > 0.0 && v_min < v_max) || count < 4 || nw < 4 {
            return Err(Error::Structural("cusp profile needs 0 < v_min < v_max and enough samples".into()));
        }
        let v: Vec<f64> = (0..count).map(|i| v_max * (v_min / v_max).powf(i as f64 / (count - 1) as f64)).collect();
        let w: Vec<f64> = (0..nw).map(|j| 0.5 * j as f64 / nw as f64).collect();
        let psi = v.iter().map(|&vi| w.iter().map(|&wj| psi(vi, wj)).collect()).collect();
        Ok(Self { v, w, psi, r_inf })
    }

    pub fn s(&self) -> Vec<f64> {
        self.v.iter().map(|v| -v.ln()).collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    /// Identically zero to rounding.
    Vanishing,
    Exponential,
    Power,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    /// Decay exponent: `μ̂` in `e^{−μ̂ s}` or `μ` in `s^{−μ}`.
    pub rate: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspReport {
    /// `sup_w |a(s,·)|` with `a = e^{2φ} − e^{2R∞}`.
    pub sup_a: Vec<f64>,
    /// `sup_w e^{2s}|∂_w e^{2φ}|`.
    pub w_term: Vec<f64>,
    pub exponential: Option<Fit>,
    pub power: Option<Fit>,
    pub class: DecayClass,
    pub w_term_class: DecayClass,
    pub w_term_decays: bool,
    /// Average of `ψ(v,·)` at the smallest sampled `v`, minus `R∞`.
    pub mean_offset: f64,
    pub pass: bool,
}

fn linear_fit(x: &[f64], y: &[f64]) -> Fit {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Fit { rate: -slope, r_squared }
}

/// Values below this count as zero.
pub const FLOOR: f64 = 1e-14;
/// Fits with a smaller coefficient of determination are inconclusive.
pub const MIN_R2: f64 = 0.95;

/// Fits `log y` against `s` and against `log s` over the last decade of `v`.
fn classify(s: &[f64], y: &[f64], scale: f64) -> (DecayClass, Option<Fit>, Option<Fit>) {
    if y.iter().all(|&a| a <= FLOOR * scale) {
        return (DecayClass::Vanishing, None, None);
    }
    let s_max = s.iter().cloned().fold(f64::MIN, f64::max);
    let window: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= s_max - 10f64.ln() - 1e-12 && y[i] > 0.0 && y[i] > f64::MIN_POSITIVE).collect();
    if window.len() < 3 {
        // Everything in the last decade underflowed: faster than any exponential.
        let decayed = y.last().map_or(false, |&l| l <= FLOOR * scale);
        return (if decayed { DecayClass::Exponential } else { DecayClass::Inconclusive }, None, None);
    }
    let xs: Vec<f64> = window.iter().map(|&i| s[i]).collect();
    let ls: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = window.iter().map(|&i| y[i].ln()).collect();
    let e = linear_fit(&xs, &ly);
    let p = linear_fit(&ls, &ly);
    let class = if e.r_squared < MIN_R2 && p.r_squared < MIN_R2 {
        DecayClass::Inconclusive
    } else if e.r_squared >= p.r_squared {
        DecayClass::Exponential
    } else {
        DecayClass::Power
    };
    (class, Some(e), Some(p))
}

/// Decay of `a = e^{2φ} − e^{2R∞}` and of the `w`-derivative term `e^{2s}|a_w|` along a cusp.
pub fn cusp_decay_report(profile: &CuspProfile) -> Result<CuspReport> {
    let v_min = profile.v.iter().cloned().fold(f64::INFINITY, f64::min);
    if v_min > 1e-3 {
        return Err(Error::Structural(format!("cusp samples stop at v = {v_min:.1e}; need v ≤ 1e-3")));
    }
    if profile.psi.len() != profile.v.len() || profile.psi.iter().any(|r| r.len() != profile.w.len()) {
        return Err(Error::Structural("cusp samples do not match the coordinate grids".into()));
    }
    let s = profile.s();
    let base = (2.0 * profile.r_inf).exp();
    let nw = profile.w.len();
    let h = profile.w[1] - profile.w[0];
    let mut sup_a = Vec::new();
    let mut w_term = Vec::new();
    for (i, row) in profile.psi.iter().enumerate() {
        let e: Vec<f64> = row.iter().map(|p| (2.0 * p).exp()).collect();
        sup_a.push(e.iter().map(|x| (x - base).abs()).fold(0.0, f64::max));
        // Fourth-order periodic central difference in w.
        let d = (0..nw)
            .map(|j| {
                let at = |k: isize| e[((j as isize + k).rem_euclid(nw as isize)) as usize];
                (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h)
            })
            .map(f64::abs)
            .fold(0.0, f64::max);
        w_term.push(d / (profile.v[i] * profile.v[i]));
    }
    let (class, exponential, power) = classify(&s, &sup_a, base);
    let (w_term_class, we, _) = classify(&s, &w_term, base);
    let w_term_decays = match w_term_class {
        DecayClass::Vanishing => true,
        DecayClass::Exponential | DecayClass::Power => {
            we.as_ref().map_or(true, |f| f.rate > 0.0) && w_term.last() <= w_term.first()
        }
        DecayClass::Inconclusive => false,
    };
    let last = profile.psi.last().expect("non-empty");
    let mean_offset = last.iter().sum::<f64>() / nw as f64 - profile.r_inf;
    let decays = match class {
        DecayClass::Vanishing => true,
        DecayClass::Exponential => exponential.as_ref().map_or(false, |f| f.rate > 0.0),
        DecayClass::Power => power.as_ref().map_or(false, |f| f.rate > 0.0),
        DecayClass::Inconclusive => false,
    };
    let pass = decays && w_term_decays;
    Ok(CuspReport { sup_a, w_term, exponential, power, class, w_term_class, w_term_decays, mean_offset, pass })
}

/// The three reference families: constant, `R∞ + v`, and `R∞ + v + e^{−1/v} sin(4πw)`.
pub fn reference_profiles(r_inf: f64) -> Result<Vec<(&'static str, CuspProfile)>> {
    let mk = |f: fn(f64, f64) -> f64| CuspProfile::from_fn(0.5, 1e-4, 60, 32, r_inf, move |v, w| r_inf + f(v, w));
    Ok(vec![
        ("constant", mk(|_, _| 0.0)?),
        ("linear", mk(|v, _| v)?),
        ("flat-oscillation", mk(|v, w| v + (-1.0 / v).exp() * (4.0 * PI * w).sin())?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_families() {
        let p = reference_profiles(0.3).unwrap();
        let r = cusp_decay_report(&p[0].1).unwrap();
        assert_eq!(r.class, DecayClass::Vanishing);
        assert!(r.pass);
        let r = cusp_decay_report(&p[1].1).unwrap();
        assert_eq!(r.class, DecayClass::Exponential);
        assert!((r.exponential.as_ref().unwrap().rate - 1.0).abs() < 0.1);
        assert!(r.pass);
        let r = cusp_decay_report(&p[2].1).unwrap();
        assert_eq!(r.class, DecayClass::Exponential);
        assert!(r.w_term_decays && r.pass);
        assert!(r.mean_offset.abs() < 1e-3);
    }

    #[test]
    fn growth_fails() {
        let p = CuspProfile::from_fn(0.5, 1e-4, 40, 16, 0.0, |v, _| -v.ln() * 0.1).unwrap();
        assert!(!cusp_decay_report(&p).unwrap().pass);
    }

    #[test]
    fn power_law_is_classified() {
        let p = CuspProfile::from_fn(0.5, 1e-6, 60, 16, 0.0, |v, _| 0.5 * (1.0 + 1.0 / (-v.ln()).powf(0.5)).ln()).unwrap();
        let r = cusp_decay_report(&p).unwrap();
        assert_eq!(r.class, DecayClass::Power);
        assert!((r.power.unwrap().rate - 0.5).abs() < 0.1);
    }

    #[test]
    fn shallow_samples_are_rejected() {
        let p = CuspProfile::from_fn(0.5, 1e-2, 20, 16, 0.0, |_, _| 0.0).unwrap();
        assert!(cusp_decay_report(&p).is_err());
    }
}
