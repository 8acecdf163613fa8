use super::field::reflect_across_circle;
use super::solver::{BeltramiSolver, QCMap};
use crate::density::{ConformalDensity, HyperbolicDensity};
use crate::error::{Error, Result};
use crate::fuchsian::RqVector;
use crate::grid::Grid;
use crate::richardson::RichardsonTable;
use crate::tensor::TensorSample;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Symmetric 2-tensor samples on a grid; nodes outside `support` carry no data.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub grid: Grid,
    pub samples: Vec<TensorSample>,
    pub support: Vec<bool>,
}

impl MetricField {
    pub fn from_fn(grid: Grid, support: impl Fn(C64) -> bool + Sync, f: impl Fn(C64) -> TensorSample + Sync) -> Self {
        let (samples, support): (Vec<_>, Vec<_>) = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let z = grid.point(k);
                if support(z) { (f(z), true) } else { (TensorSample::ZERO, false) }
            })
            .unzip();
        Self { grid, samples, support }
    }

    pub fn try_from_fn(grid: Grid, support: impl Fn(C64) -> bool + Sync, f: impl Fn(C64) -> Result<TensorSample> + Sync) -> Result<Self> {
        let items: Result<Vec<(TensorSample, bool)>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let z = grid.point(k);
                if support(z) { f(z).map(|t| (t, true)) } else { Ok((TensorSample::ZERO, false)) }
            })
            .collect();
        let (samples, support) = items?.into_iter().unzip();
        Ok(Self { grid, samples, support })
    }

    /// Samples of an `RQ` vector on the same grid and support as `self`.
    pub fn sample_like(&self, v: &RqVector) -> MetricField {
        let grid = self.grid;
        let samples = (0..grid.len())
            .into_par_iter()
            .map(|k| if self.support[k] { v.tensor_at(grid.point(k)) } else { TensorSample::ZERO })
            .collect();
        Self { grid, samples, support: self.support.clone() }
    }

    pub fn map(&self, f: impl Fn(&TensorSample) -> TensorSample) -> MetricField {
        Self { grid: self.grid, samples: self.samples.iter().map(f).collect(), support: self.support.clone() }
    }

    fn check_compatible(&self, other: &MetricField) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Structural("metric fields on different grids".into()));
        }
        Ok(())
    }

    pub fn combine(&self, a: f64, other: &MetricField, b: f64) -> Result<MetricField> {
        self.check_compatible(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(x, y)| x.scale(a).add(&y.scale(b))).collect();
        let support = self.support.iter().zip(&other.support).map(|(a, b)| *a && *b).collect();
        Ok(Self { grid: self.grid, samples, support })
    }

    /// The `dz dz̄` part alone.
    pub fn trace_part(&self) -> MetricField {
        self.map(|t| TensorSample::conformal(t.e))
    }

    /// The `dz²` and `dz̄²` parts alone.
    pub fn traceless_part(&self) -> MetricField {
        self.map(|t| TensorSample::new(t.q, 0.0))
    }

    /// `∫ ⟨self, other⟩ da` over the common support for the metric `ρ|dz|²`, by the nodal rule.
    pub fn inner(&self, other: &MetricField, rho: &dyn ConformalDensity) -> Result<f64> {
        self.check_compatible(other)?;
        let cell = self.grid.cell_area();
        let parts: Result<Vec<f64>> = (0..self.grid.len())
            .into_par_iter()
            .filter(|&k| self.support[k] && other.support[k])
            .map(|k| {
                let r = rho.eval(self.grid.point(k))?;
                Ok(cell * r * self.samples[k].inner(&other.samples[k], r))
            })
            .collect();
        Ok(parts?.iter().sum())
    }

    pub fn norm(&self, rho: &dyn ConformalDensity) -> Result<f64> {
        Ok(self.inner(self, rho)?.max(0.0).sqrt())
    }

    /// Largest pointwise `|⟨a, b⟩|/(|a||b|)` over the common support.
    pub fn max_pointwise_cosine(&self, other: &MetricField, rho: &dyn ConformalDensity) -> Result<f64> {
        self.check_compatible(other)?;
        let mut worst = 0.0f64;
        for k in 0..self.grid.len() {
            if !(self.support[k] && other.support[k]) {
                continue;
            }
            let r = rho.eval(self.grid.point(k))?;
            let (a, b) = (&self.samples[k], &other.samples[k]);
            let den = (a.inner(a, r) * b.inner(b, r)).sqrt();
            if den > 0.0 {
                worst = worst.max(a.inner(b, r).abs() / den);
            }
        }
        Ok(worst)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().zip(&self.support).filter(|(_, s)| **s).map(|(t, _)| t.q.norm().max(t.e.abs())).fold(0.0, f64::max)
    }
}

/// Pullback `f*(ρ|dz|²)` at the grid nodes selected by `support`.
pub fn pullback_metric(f: &QCMap, rho: &dyn ConformalDensity, support: impl Fn(C64) -> bool + Sync) -> Result<MetricField> {
    let grid = *f.grid();
    MetricField::try_from_fn(grid, support, |z| {
        let (i, j) = {
            let (x, y) = grid.locate(z);
            (x.round() as usize, y.round() as usize)
        };
        let k = grid.index(i, j);
        pullback_sample(rho, f.f.data[k], f.f_z[k], f.f_zbar[k])
    })
}

/// Pullback at an arbitrary point, interpolating the map and its derivatives.
pub fn pullback_at(f: &QCMap, rho: &dyn ConformalDensity, z: C64) -> Result<TensorSample> {
    let grid = *f.grid();
    let fz = crate::grid::GridField { grid, data: f.f_z.clone() };
    let fzb = crate::grid::GridField { grid, data: f.f_zbar.clone() };
    pullback_sample(rho, f.f.interpolate(z)?, fz.interpolate(z)?, fzb.interpolate(z)?)
}

fn pullback_sample(rho: &dyn ConformalDensity, w: C64, a: C64, b: C64) -> Result<TensorSample> {
    let r = rho.eval(w)?;
    Ok(TensorSample::new(2.0 * r * a * b.conj(), r * (a.norm_sqr() + b.norm_sqr())))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariationOptions {
    pub steps: Vec<f64>,
    /// Differences of successive estimates below this count as converged.
    pub noise_floor: f64,
}

impl Default for VariationOptions {
    fn default() -> Self {
        Self { steps: vec![1e-2, 5e-3, 2.5e-3], noise_floor: 1e-9 }
    }
}

/// Finite-difference derivative of the pulled-back hyperbolic metric of the disk.
#[derive(Clone, Debug)]
pub struct MetricVariation {
    /// Extrapolated `d/dt|₀ (f^{tμ})*(ρ|dz|²)`.
    pub field: MetricField,
    /// Its `dz dz̄` coefficient.
    pub e_field: MetricField,
    /// Table built from the sup-norm of the raw central differences.
    pub table: RichardsonTable,
    pub solver_residual: f64,
}

/// `d/dt|₀ (f^{tμ})*(ρ|dz|²)` for `μ = φ̄/(2ρ)` on the disk, extended by reflection so that
/// `f^{tμ}` preserves the disk. Evaluated on nodes where `support` holds.
pub fn metric_variation(
    v: &RqVector,
    solver: &BeltramiSolver,
    options: &VariationOptions,
    support: impl Fn(C64) -> bool + Sync + Copy,
) -> Result<MetricVariation> {
    let grid = *solver.grid();
    let rho = HyperbolicDensity::disk();
    let mu = reflect_across_circle(
        |z| {
            let d = 1.0 - z.norm_sqr();
            v.phi.eval(z).conj() * d * d / 8.0
        },
        grid,
    )?;
    let mut raw: Vec<Vec<TensorSample>> = Vec::new();
    let mut residual = 0.0f64;
    let mut support_mask = None;
    for &t in &options.steps {
        let plus = solver.solve(&mu.scaled(t)?)?;
        let minus = solver.solve(&mu.scaled(-t)?)?;
        residual = residual.max(plus.residual_l2).max(minus.residual_l2);
        let a = pullback_metric(&plus, &rho, support)?;
        let b = pullback_metric(&minus, &rho, support)?;
        let d: Vec<TensorSample> = a.samples.iter().zip(&b.samples).map(|(x, y)| x.sub(y).scale(0.5 / t)).collect();
        support_mask = Some(a.support.clone());
        raw.push(d);
    }
    let support_mask = support_mask.ok_or_else(|| Error::Structural("no finite-difference steps".into()))?;
    let best = richardson_fields(&raw, &options.steps);
    let sup = |s: &Vec<TensorSample>| s.iter().map(|t| t.q.norm() + t.e.abs()).fold(0.0, f64::max);
    let scalar: Vec<f64> = raw.iter().map(sup).collect();
    let diffs: Vec<f64> = raw.windows(2).map(|w| sup(&w[0].iter().zip(&w[1]).map(|(a, b)| a.sub(b)).collect())).collect();
    let mut table = RichardsonTable::build(&options.steps, &scalar, 2, 2);
    table.differences = diffs;
    let floor = options.noise_floor * scalar.iter().cloned().fold(0.0, f64::max).max(1e-300);
    if !table.is_monotone(floor) {
        return Err(Error::StepSize(table.differences.clone()));
    }
    let field = MetricField { grid, samples: best, support: support_mask };
    let e_field = field.trace_part();
    Ok(MetricVariation { field, e_field, table, solver_residual: residual })
}

/// Richardson extrapolation of central differences sampled at geometrically shrinking steps.
pub(crate) fn richardson_fields(raw: &[Vec<TensorSample>], steps: &[f64]) -> Vec<TensorSample> {
    let mut level: Vec<Vec<TensorSample>> = raw.to_vec();
    for j in 1..raw.len() {
        level = (0..level.len() - 1)
            .map(|i| {
                let p = (steps[i] / steps[i + 1]).powi(2 * j as i32);
                level[i + 1].iter().zip(&level[i]).map(|(h, l)| h.scale(p / (p - 1.0)).sub(&l.scale(1.0 / (p - 1.0)))).collect()
            })
            .collect();
    }
    level.into_iter().next().unwrap_or_default()
}
