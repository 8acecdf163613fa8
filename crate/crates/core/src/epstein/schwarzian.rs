use crate::beltrami::MetricField;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::series::PowerSeries;
use crate::tensor::TensorSample;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Schwarzian derivative samples with stencil diagnostics.
#[derive(Clone, Debug)]
pub struct SchwarzianField {
    pub grid: Grid,
    pub samples: Vec<C64>,
    /// Nodes where the stencil fits inside the grid.
    pub valid: Vec<bool>,
    /// Formal order of the derivative stencil in the grid spacing.
    pub stencil_order: u32,
    /// Largest difference between the spacing-`h` and spacing-`2h` results.
    pub truncation_estimate: f64,
}

impl SchwarzianField {
    /// The tensor `Re(S dz²)` on the valid nodes.
    pub fn tensor(&self) -> MetricField {
        MetricField {
            grid: self.grid,
            samples: self.samples.iter().map(|s| TensorSample::new(*s, 0.0)).collect(),
            support: self.valid.clone(),
        }
    }
}

/// Derivatives of orders 1..=3 from samples on a ring `z + r ωᵏ`, `ω = e^{2πi/m}`.
fn ring_derivatives(values: &[C64], r: f64) -> [C64; 3] {
    let m = values.len();
    let mut out = [C64::new(0.0, 0.0); 3];
    for (n, slot) in out.iter_mut().enumerate() {
        let order = n + 1;
        let mut acc = C64::new(0.0, 0.0);
        for (k, v) in values.iter().enumerate() {
            let w = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (order * k) as f64 / m as f64);
            acc += v * w;
        }
        let fact = [1.0, 2.0, 6.0][n];
        *slot = acc * fact / (m as f64 * r.powi(order as i32));
    }
    out
}

fn schwarzian_from(d: [C64; 3], z: C64, scale: f64) -> Result<C64> {
    if d[0].norm() <= 1e-10 * scale.max(1e-300) {
        return Err(Error::CriticalPoint(z));
    }
    let u = d[1] / d[0];
    Ok(d[2] / d[0] - 1.5 * u * u)
}

/// Schwarzian of samples of a holomorphic function on a grid, using the four nearest nodes
/// as a ring stencil (fourth order for holomorphic data).
pub fn schwarzian(f: &GridField<C64>) -> Result<SchwarzianField> {
    let g = f.grid;
    let h = g.h;
    let scale = f.data.iter().map(|v| v.norm()).fold(0.0, f64::max) / (g.nx as f64 * h);
    let ring = |i: usize, j: usize, s: usize| [f.at(i + s, j), f.at(i, j + s), f.at(i - s, j), f.at(i, j - s)];
    let rows: Result<Vec<(C64, bool, f64)>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = g.ij(k);
            if i < 2 || j < 2 || i + 2 >= g.nx || j + 2 >= g.ny {
                return Ok((C64::new(0.0, 0.0), false, 0.0));
            }
            let z = g.point(k);
            let s1 = schwarzian_from(ring_derivatives(&ring(i, j, 1), h), z, scale)?;
            let s2 = schwarzian_from(ring_derivatives(&ring(i, j, 2), 2.0 * h), z, scale)?;
            Ok((s1, true, (s1 - s2).norm()))
        })
        .collect();
    let rows = rows?;
    let truncation_estimate = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(SchwarzianField {
        grid: g,
        samples: rows.iter().map(|r| r.0).collect(),
        valid: rows.iter().map(|r| r.1).collect(),
        stencil_order: 4,
        truncation_estimate,
    })
}

/// Schwarzian of a function given pointwise, from an eight-point ring of radius `r`.
pub fn schwarzian_at(f: impl Fn(C64) -> C64, z: C64, r: f64) -> Result<C64> {
    let values: Vec<C64> = (0..8).map(|k| f(z + C64::from_polar(r, std::f64::consts::PI * k as f64 / 4.0))).collect();
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max) / r;
    schwarzian_from(ring_derivatives(&values, r), z, scale)
}

/// `II₀ = −Re(S(f) dz²)` from grid samples of the uniformizing map.
pub fn ii0_from_uniformizing_map(f: &GridField<C64>) -> Result<MetricField> {
    Ok(schwarzian(f)?.tensor().map(|t| TensorSample::new(-t.q, 0.0)))
}

/// `II₀ = −Re(S(F) dz²)` for a map given by its power series; returns the series of `−S(F)`.
pub fn ii0_series(f: &PowerSeries) -> Result<PowerSeries> {
    Ok(f.schwarzian()?.scale(C64::new(-1.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::MoebiusMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_moebius(rng: &mut ChaCha8Rng) -> MoebiusMap {
        let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (a, b, cc) = (c() + 1.5, c(), c() * 0.3);
        let d = (1.0 + b * cc) / a;
        MoebiusMap::new(a, b, cc, d).unwrap()
    }

    #[test]
    fn closed_forms() {
        let s = schwarzian_at(|z| z * z, C64::new(1.0, 0.0), 1e-2).unwrap();
        assert!((s + 1.5).norm() < 1e-8, "{s}");
        for z in [C64::new(0.0, 0.0), C64::new(1.0, -2.0)] {
            let s = schwarzian_at(|z| z.exp(), z, 1e-2).unwrap();
            assert!((s + 0.5).norm() < 1e-8);
        }
        let m = MoebiusMap::new(C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(0.5, 0.0), C64::new(3.0, 0.0)).unwrap();
        let s = schwarzian_at(|z| m.apply_finite(z).unwrap().0, C64::new(0.2, 0.1), 1e-2).unwrap();
        assert!(s.norm() < 1e-8);
    }

    #[test]
    fn critical_point_is_reported() {
        assert!(matches!(schwarzian_at(|z| z * z, C64::new(0.0, 0.0), 1e-2), Err(Error::CriticalPoint(_))));
    }

    #[test]
    fn moebius_invariance_and_chain_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = |z: C64| z.exp() + 0.3 * z * z;
        let df = |z: C64| z.exp() + 0.6 * z;
        for _ in 0..100 {
            let m = random_moebius(&mut rng);
            let z = C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let post = |w: C64| m.apply(f(w)).finite().map(|x| x.0).unwrap_or(C64::new(f64::NAN, 0.0));
            let (Ok(a), Ok(b)) = (schwarzian_at(post, z, 1e-2), schwarzian_at(f, z, 1e-2)) else { continue };
            if a.is_finite() {
                assert!((a - b).norm() < 1e-8 * (1.0 + b.norm()), "{a} {b}");
            }
            // S(g∘f) = (S(g)∘f)(f′)² + S(f) with g = exp.
            let gf = |w: C64| f(w).exp();
            let sg = -0.5;
            let lhs = schwarzian_at(gf, z, 1e-2).unwrap();
            let rhs = sg * df(z) * df(z) + b;
            assert!((lhs - rhs).norm() < 1e-6 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn grid_stencil_spot_value_and_critical_point() {
        let g = Grid { nx: 33, ny: 33, origin: C64::new(0.5, -0.5), h: 1.0 / 32.0 };
        let ii0 = ii0_from_uniformizing_map(&GridField::from_fn(g, |z| z * z)).unwrap();
        let k = g.index(16, 16);
        assert_eq!(g.point(k), C64::new(1.0, 0.0));
        assert!((ii0.samples[k].q - 1.5).norm() < 1e-6, "{}", ii0.samples[k].q);
        assert_eq!(ii0.samples[k].e, 0.0);

        let g = Grid { nx: 17, ny: 17, origin: C64::new(-1.0, -1.0), h: 0.125 };
        let r = schwarzian(&GridField::from_fn(g, |z| z * z));
        assert!(matches!(r, Err(Error::CriticalPoint(z)) if z.norm() < 1e-15));
    }

    #[test]
    fn grid_stencil_is_fourth_order() {
        let err = |n: usize| {
            let g = Grid::centered(n, 0.5);
            let s = schwarzian(&GridField::from_fn(g, |z| (z + 1.0).ln())).unwrap();
            (0..g.len()).filter(|&k| s.valid[k] && g.point(k).norm() < 0.3).map(|k| {
                let w = g.point(k) + 1.0;
                (s.samples[k] - 0.5 / (w * w)).norm()
            }).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!((e1 / e2).log2() > 3.5, "{e1} {e2}");
    }
}
