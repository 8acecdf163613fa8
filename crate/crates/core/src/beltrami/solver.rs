use super::field::BeltramiField;
use crate::error::{Error, Result};
use crate::fft2::Fft2;
use crate::gauss::gauss_legendre;
use crate::grid::{Grid, GridField};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop when successive iterates differ by less than this in sup norm.
    pub tol: f64,
    pub max_iterations: usize,
    /// Largest admissible `‖μ‖∞`.
    pub mu_cap: f64,
    /// Offsets (in cells, sup norm) whose kernel entries are integrated exactly.
    pub near_radius: i64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iterations: 400, mu_cap: 0.9, near_radius: 5 }
    }
}

/// Discrete Beurling and Cauchy transforms on a fixed grid.
///
/// The Beurling transform uses a Galerkin weight (bilinear tent against the kernel) on
/// nearby cells and the point kernel elsewhere; the Cauchy transform integrates the kernel
/// exactly over nearby cells. Convolutions are linear (zero padded to twice the size).
pub struct BeltramiSolver {
    grid: Grid,
    fft: Fft2,
    beurling_hat: Vec<C64>,
    cauchy_hat: Vec<C64>,
    pub options: SolverOptions,
}

fn beurling_weight(mx: i64, my: i64, near: i64, gauss: &(Vec<f64>, Vec<f64>)) -> C64 {
    if mx == 0 && my == 0 {
        return C64::new(0.0, 0.0);
    }
    let w = C64::new(mx as f64, my as f64);
    if mx.abs().max(my.abs()) > near {
        return -1.0 / (PI * w * w);
    }
    let (x, wt) = gauss;
    let mut acc = C64::new(0.0, 0.0);
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for (xi, wi) in x.iter().zip(wt) {
                let ax = sx * 0.5 * (xi + 1.0);
                for (yj, wj) in x.iter().zip(wt) {
                    let ay = sy * 0.5 * (yj + 1.0);
                    let tent = (1.0 - ax.abs()) * (1.0 - ay.abs());
                    let d = w + C64::new(ax, ay);
                    acc += 0.25 * wi * wj * tent / (d * d);
                }
            }
        }
    }
    -acc / PI
}

fn cauchy_weight(mx: i64, my: i64, near: i64, gauss: &(Vec<f64>, Vec<f64>)) -> C64 {
    if mx == 0 && my == 0 {
        return C64::new(0.0, 0.0);
    }
    let w = C64::new(mx as f64, my as f64);
    if mx.abs().max(my.abs()) > near {
        return 1.0 / (PI * w);
    }
    let (x, wt) = gauss;
    let mut acc = C64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(wt) {
        for (yj, wj) in x.iter().zip(wt) {
            acc += 0.25 * wi * wj / (w - C64::new(0.5 * xi, 0.5 * yj));
        }
    }
    acc / PI
}

/// Exact cell integral `(1/π)∫_cell dζ/(z − ζ)` for a unit cell centred at the origin, by subdivision.
fn cauchy_cell(z: C64) -> C64 {
    let (x, w) = gauss_legendre(8);
    let sub = 4;
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..sub {
        for b in 0..sub {
            let c = C64::new((a as f64 + 0.5) / sub as f64 - 0.5, (b as f64 + 0.5) / sub as f64 - 0.5);
            for (xi, wi) in x.iter().zip(&w) {
                for (yj, wj) in x.iter().zip(&w) {
                    let p = c + C64::new(0.5 * xi, 0.5 * yj) / sub as f64;
                    acc += 0.25 * wi * wj / ((sub * sub) as f64) / (z - p);
                }
            }
        }
    }
    acc / PI
}

impl BeltramiSolver {
    pub fn new(grid: Grid, options: SolverOptions) -> Result<Self> {
        if grid.nx != grid.ny {
            return Err(Error::Structural("the solver needs a square grid".into()));
        }
        let n = grid.nx;
        let m = 2 * n;
        let fft = Fft2::new(m);
        let gauss = gauss_legendre(24);
        let near = options.near_radius;
        let offset = |i: usize| if i < n { i as i64 } else { i as i64 - m as i64 };
        let mut kb = vec![C64::new(0.0, 0.0); m * m];
        let mut kc = vec![C64::new(0.0, 0.0); m * m];
        kb.par_chunks_mut(m).zip(kc.par_chunks_mut(m)).enumerate().for_each(|(j, (rb, rc))| {
            let my = offset(j);
            for i in 0..m {
                let mx = offset(i);
                rb[i] = beurling_weight(mx, my, near, &gauss);
                rc[i] = cauchy_weight(mx, my, near, &gauss) * grid.h;
            }
        });
        fft.forward(&mut kb);
        fft.forward(&mut kc);
        Ok(Self { grid, fft, beurling_hat: kb, cauchy_hat: kc, options })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn convolve(&self, kernel_hat: &[C64], a: &[C64]) -> Vec<C64> {
        let n = self.grid.nx;
        let m = 2 * n;
        let mut buf = vec![C64::new(0.0, 0.0); m * m];
        for j in 0..n {
            buf[j * m..j * m + n].copy_from_slice(&a[j * n..(j + 1) * n]);
        }
        self.fft.forward(&mut buf);
        buf.par_iter_mut().zip(kernel_hat.par_iter()).for_each(|(b, k)| *b *= k);
        self.fft.inverse(&mut buf);
        let scale = 1.0 / (m * m) as f64;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for i in 0..n {
                out[j * n + i] = buf[j * m + i] * scale;
            }
        }
        out
    }

    /// Discrete Beurling transform of grid samples.
    pub fn beurling(&self, a: &[C64]) -> Vec<C64> {
        self.convolve(&self.beurling_hat, a)
    }

    /// Discrete solid Cauchy transform `(1/π)∫ a(ζ)/(z − ζ)` at the grid nodes.
    pub fn cauchy(&self, a: &[C64]) -> Vec<C64> {
        self.convolve(&self.cauchy_hat, a)
    }

    /// Principal solution `f = z + C h`, `h = μ(1 + B h)`.
    pub fn solve(&self, mu: &BeltramiField) -> Result<QCMap> {
        if !mu.grid().same_as(&self.grid) {
            return Err(Error::Structural("coefficient and solver use different grids".into()));
        }
        if mu.sup_norm > self.options.mu_cap {
            return Err(Error::MuTooLarge { sup: mu.sup_norm, location: mu.sup_location });
        }
        let m = &mu.field.data;
        let mut h = m.clone();
        let mut iterations = 0;
        let mut prev_diff = f64::INFINITY;
        let mut growth = 0;
        let mut bh = vec![C64::new(0.0, 0.0); h.len()];
        if mu.sup_norm > 0.0 {
            loop {
                iterations += 1;
                bh = self.beurling(&h);
                let next: Vec<C64> = m.iter().zip(&bh).map(|(mu, b)| mu * (1.0 + b)).collect();
                let diff = next.iter().zip(&h).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                h = next;
                if !diff.is_finite() {
                    return Err(Error::SolverFailure { sup: mu.sup_norm, iterations });
                }
                growth = if diff > prev_diff { growth + 1 } else { 0 };
                prev_diff = diff;
                if diff < self.options.tol {
                    break;
                }
                if growth >= 5 || iterations >= self.options.max_iterations {
                    return Err(Error::SolverFailure { sup: mu.sup_norm, iterations });
                }
            }
            bh = self.beurling(&h);
        }
        let ch = self.cauchy(&h);
        let grid = self.grid;
        let f: Vec<C64> = ch.iter().enumerate().map(|(k, c)| grid.point(k) + c).collect();
        let f_z: Vec<C64> = bh.iter().map(|b| 1.0 + b).collect();
        let num: f64 = h.iter().zip(m).zip(&f_z).map(|((h, mu), fz)| (h - mu * fz).norm_sqr()).sum();
        let den: f64 = m.iter().zip(&f_z).map(|(mu, fz)| (mu * fz).norm_sqr()).sum();
        let residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        let mut map = QCMap {
            f: GridField { grid, data: f },
            f_z,
            f_zbar: h,
            residual_l2: residual,
            iterations,
            sup_mu: mu.sup_norm,
            normalization: Normalization::default(),
        };
        map.normalization = Normalization { at_zero: map.eval(C64::new(0.0, 0.0))?, at_one: map.eval(C64::new(1.0, 0.0))? };
        Ok(map)
    }
}

/// Values of a principal solution at 0 and 1; the map is normalized at ∞ by `f(z) = z + O(1/z)`.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Normalization {
    pub at_zero: C64,
    pub at_one: C64,
}

/// Sampled quasiconformal map with its derivative fields.
#[derive(Clone, Debug)]
pub struct QCMap {
    pub f: GridField<C64>,
    pub f_z: Vec<C64>,
    /// `∂f/∂z̄`; for solver output this is the density `h` of the Cauchy transform.
    pub f_zbar: Vec<C64>,
    /// `‖f_z̄ − μ f_z‖₂ / ‖μ f_z‖₂` on the grid.
    pub residual_l2: f64,
    pub iterations: usize,
    pub sup_mu: f64,
    pub normalization: Normalization,
}

impl QCMap {
    /// Samples a map given in closed form.
    pub fn from_fn(grid: Grid, f: impl Fn(C64) -> (C64, C64, C64) + Sync) -> Self {
        let s: Vec<(C64, C64, C64)> = (0..grid.len()).into_par_iter().map(|k| f(grid.point(k))).collect();
        let mut map = QCMap {
            f: GridField { grid, data: s.iter().map(|x| x.0).collect() },
            f_z: s.iter().map(|x| x.1).collect(),
            f_zbar: s.iter().map(|x| x.2).collect(),
            residual_l2: 0.0,
            iterations: 0,
            sup_mu: s.iter().map(|x| (x.2 / x.1).norm()).fold(0.0, f64::max),
            normalization: Normalization::default(),
        };
        map.normalization = Normalization {
            at_zero: map.f.interpolate(C64::new(0.0, 0.0)).unwrap_or(C64::new(f64::NAN, 0.0)),
            at_one: map.f.interpolate(C64::new(1.0, 0.0)).unwrap_or(C64::new(f64::NAN, 0.0)),
        };
        map
    }

    pub fn grid(&self) -> &Grid {
        &self.f.grid
    }

    /// Bicubic interpolation inside the grid, direct Cauchy summation outside it.
    pub fn eval(&self, z: C64) -> Result<C64> {
        match self.f.interpolate(z) {
            Ok(v) => Ok(v),
            Err(_) => Ok(self.eval_direct(z)),
        }
    }

    /// `z + (1/π)∫ h(ζ)/(z − ζ)` summed over grid cells.
    pub fn eval_direct(&self, z: C64) -> C64 {
        let g = self.grid();
        let h = g.h;
        let sum: C64 = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let d = (z - g.point(k)) / h;
                let w = if d.re.abs().max(d.im.abs()) <= 3.0 { cauchy_cell(d) } else { 1.0 / (PI * d) };
                self.f_zbar[k] * w
            })
            .sum();
        z + sum * h
    }

    /// Post-composes with the affine map sending `f(0) ↦ 0` and `f(1) ↦ 1`.
    pub fn normalized_01(&self) -> QCMap {
        let a = self.normalization.at_zero;
        let s = (self.normalization.at_one - a).inv();
        let mut out = self.clone();
        out.f.data.iter_mut().for_each(|v| *v = (*v - a) * s);
        out.f_z.iter_mut().for_each(|v| *v *= s);
        out.f_zbar.iter_mut().for_each(|v| *v *= s);
        out.normalization = Normalization { at_zero: C64::new(0.0, 0.0), at_one: C64::new(1.0, 0.0) };
        out
    }

    /// True when `|f_z̄| < |f_z|` at every node.
    pub fn orientation_preserving(&self) -> bool {
        self.f_z.iter().zip(&self.f_zbar).all(|(a, b)| b.norm() < a.norm())
    }
}
