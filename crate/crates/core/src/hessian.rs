//! Second variation of the renormalized volume at the Fuchsian point, measured through the
//! `II₀` response of simultaneously uniformized quasi-Fuchsian deformations of the disk.
//!
//! Both ends are modelled over the trivial group: the top end is the unit disk, the bottom
//! end its exterior. Quadratic differentials are power series `Σ cₙ zⁿ` and their pairing is
//! the hyperbolic `L²` product, under which monomials are orthogonal with
//! `‖zⁿ‖² = π/((n+1)(n+2)(n+3))`.

use crate::beltrami::{BeltramiField, BeltramiSolver, MetricField, SolverOptions};
use crate::conformal::{theodorsen, TheodorsenOptions};
use crate::corrected::SkinningOperator;
use crate::density::HyperbolicDensity;
use crate::error::{Error, Result};
use crate::fuchsian::{poincare_series, FuchsianGroup, FundamentalDomain, RqVector, SeriesTerms};
use crate::grid::Grid;
use crate::richardson::RichardsonTable;
use crate::series::PowerSeries;
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Squared norm of `Re(zⁿ dz²)` for the hyperbolic metric of the disk.
pub fn monomial_norm_sqr(n: usize) -> f64 {
    let n = n as f64;
    PI / ((n + 1.0) * (n + 2.0) * (n + 3.0))
}

/// Pairing of two coefficient sequences.
pub fn coeff_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).enumerate().map(|(n, (x, y))| (x * y.conj()).re * monomial_norm_sqr(n)).sum()
}

pub fn coeff_norm(a: &[C64]) -> f64 {
    coeff_inner(a, a).sqrt()
}

/// The vector `Re(Σ cₙ zⁿ dz²)` over the trivial group.
pub fn disk_vector(coeffs: &[C64]) -> RqVector {
    let terms = SeriesTerms::new(Arc::new(FuchsianGroup::trivial()), 0);
    RqVector::new(poincare_series(coeffs, &terms).expect("the trivial group has no divergent series"))
}

fn coeffs_of(v: &RqVector, len: usize) -> Vec<C64> {
    (0..len).map(|n| v.phi.seed.get(n).copied().unwrap_or_default()).collect()
}

fn is_disk(v: &RqVector) -> bool {
    matches!(v.phi.group().domain, FundamentalDomain::Disk) && v.phi.group().generators.is_empty()
}

/// Tangent vector `(v₊, v₋)` at the Fuchsian point: `v₊` deforms the disk, `v₋` its exterior.
#[derive(Clone, Debug)]
pub struct TangentPair {
    pub plus: RqVector,
    pub minus: RqVector,
}

impl TangentPair {
    /// Both components must be polynomial differentials over the trivial group vanishing to
    /// second order at the origin, so that the exterior coefficient decays at infinity.
    pub fn new(plus: RqVector, minus: RqVector) -> Result<Self> {
        for v in [&plus, &minus] {
            if !is_disk(v) {
                return Err(Error::Structural("tangent pairs live over the trivial group of the disk".into()));
            }
            if v.phi.seed.iter().take(2).any(|c| c.norm() > 0.0) {
                return Err(Error::Structural("tangent components must vanish to second order at 0".into()));
            }
        }
        Ok(Self { plus, minus })
    }

    pub fn one_sided(v: RqVector) -> Result<Self> {
        let zero = v.scaled(0.0);
        Self::new(v, zero)
    }

    pub fn diagonal(v: RqVector) -> Result<Self> {
        Self::new(v.clone(), v)
    }

    pub fn antidiagonal(v: RqVector) -> Result<Self> {
        let m = v.scaled(-1.0);
        Self::new(v, m)
    }

    pub fn degree(&self) -> usize {
        self.plus.phi.seed.len().max(self.minus.phi.seed.len())
    }

    pub fn plus_coeffs(&self, len: usize) -> Vec<C64> {
        coeffs_of(&self.plus, len)
    }

    pub fn minus_coeffs(&self, len: usize) -> Vec<C64> {
        coeffs_of(&self.minus, len)
    }

    /// Predicted first-order responses `(−¼(v₊ − v₋), −¼(v₋ − v₊))`.
    pub fn predicted_response(&self, len: usize) -> (Vec<C64>, Vec<C64>) {
        let (p, m) = (self.plus_coeffs(len), self.minus_coeffs(len));
        let plus = p.iter().zip(&m).map(|(a, b)| -0.25 * (a - b)).collect();
        let minus = p.iter().zip(&m).map(|(a, b)| -0.25 * (b - a)).collect();
        (plus, minus)
    }

    pub fn norm_sqr(&self) -> f64 {
        let len = self.degree();
        let (p, m) = (self.plus_coeffs(len), self.minus_coeffs(len));
        coeff_inner(&p, &p) + coeff_inner(&m, &m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct LabOptions {
    /// Solver grid size and half-width of the square it covers.
    pub grid_size: usize,
    pub half_width: f64,
    /// Finite-difference amplitudes as fractions of `mu_cap/‖μ‖∞`, shrinking by a constant ratio.
    pub amplitudes: Vec<f64>,
    /// Number of Taylor coefficients kept in each response.
    pub degree: usize,
    /// Responses are projected onto monomials of degree below this.
    pub basis_degree: usize,
    /// Richardson differences below this fraction of the response size count as converged.
    pub noise_floor: f64,
    pub solver: SolverOptions,
    pub theodorsen: TheodorsenOptions,
}

impl Default for LabOptions {
    fn default() -> Self {
        Self {
            grid_size: 512,
            half_width: 4.0,
            amplitudes: vec![0.02, 0.01, 0.005],
            degree: 24,
            basis_degree: 12,
            noise_floor: 1e-6,
            solver: SolverOptions::default(),
            theodorsen: TheodorsenOptions::default(),
        }
    }
}

/// `−S` of the uniformizing maps of both ends, as power series in the end coordinates.
#[derive(Clone, Debug)]
pub struct EndSchwarzians {
    pub plus: PowerSeries,
    pub minus: PowerSeries,
    /// Largest negative-frequency leakage of the two boundary-value problems.
    pub leakage: f64,
    pub solver_residual: f64,
}

impl EndSchwarzians {
    /// `II₀ = Re(q dz²)` of one end sampled on nodes of `grid` inside the disk of radius `r`.
    pub fn field(&self, plus: bool, grid: Grid, r: f64) -> MetricField {
        let s = if plus { &self.plus } else { &self.minus };
        MetricField::from_fn(grid, |z| z.norm() < r, |z| crate::tensor::TensorSample::new(s.eval(z), 0.0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearResponse {
    /// Richardson-extrapolated `D II₀` coefficients of each end.
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
    /// Absolute amplitudes multiplying the unit coefficient `μ(v)`.
    pub amplitudes: Vec<f64>,
    pub sup_mu: f64,
    pub table_plus: RichardsonTable,
    pub table_minus: RichardsonTable,
    /// Norms of `II₀` itself at each positive amplitude, both ends combined.
    pub forward_norms: Vec<f64>,
    /// Relative size of the part of each response outside the projection basis.
    pub projection_residual: f64,
    pub leakage: f64,
    pub solver_residual: f64,
}

impl LinearResponse {
    pub fn as_vectors(&self) -> (RqVector, RqVector) {
        (disk_vector(&self.plus), disk_vector(&self.minus))
    }

    /// `‖R − target‖/‖target‖` for both ends combined; `scale` replaces `‖target‖` when given.
    pub fn relative_error(&self, target: &(Vec<C64>, Vec<C64>), scale: Option<f64>) -> f64 {
        let dp: Vec<C64> = self.plus.iter().zip(&target.0).map(|(a, b)| a - b).collect();
        let dm: Vec<C64> = self.minus.iter().zip(&target.1).map(|(a, b)| a - b).collect();
        let err = (coeff_inner(&dp, &dp) + coeff_inner(&dm, &dm)).sqrt();
        let s = scale.unwrap_or_else(|| (coeff_inner(&target.0, &target.0) + coeff_inner(&target.1, &target.1)).sqrt());
        err / s
    }

    /// Same for a single end.
    pub fn end_error(&self, plus: bool, target: &[C64]) -> f64 {
        let r = if plus { &self.plus } else { &self.minus };
        let d: Vec<C64> = r.iter().zip(target).map(|(a, b)| a - b).collect();
        coeff_norm(&d) / coeff_norm(target)
    }

    /// `log₂` ratios of successive `‖II₀(t)‖` values (2 for a quadratic response).
    pub fn forward_slopes(&self) -> Vec<f64> {
        self.forward_norms
            .windows(2)
            .zip(self.amplitudes.windows(2))
            .map(|(n, t)| (n[0] / n[1]).ln() / (t[0] / t[1]).ln())
            .collect()
    }
}

pub struct HessianLab {
    pub options: LabOptions,
    solver: BeltramiSolver,
}

impl HessianLab {
    pub fn new(options: LabOptions) -> Result<Self> {
        if options.amplitudes.len() < 2 || options.basis_degree == 0 || options.degree < options.basis_degree {
            return Err(Error::Structural("hessian lab needs two amplitudes and a non-empty basis".into()));
        }
        let grid = Grid::centered(options.grid_size, options.half_width);
        let solver = BeltramiSolver::new(grid, options.solver)?;
        Ok(Self { options, solver })
    }

    pub fn grid(&self) -> &Grid {
        self.solver.grid()
    }

    /// Unit-amplitude coefficient: `v̄₊(1−|z|²)²/8` in the disk, the reflection of the same
    /// expression for `v₋` outside it.
    pub fn beltrami(&self, d: &TangentPair) -> Result<BeltramiField> {
        let top = |v: &RqVector, z: C64| {
            let s = 1.0 - z.norm_sqr();
            v.phi.eval(z).conj() * s * s / 8.0
        };
        BeltramiField::from_fn(*self.grid(), |z| {
            let r2 = z.norm_sqr();
            if r2 < 1.0 {
                top(&d.plus, z)
            } else if r2 > 1.0 {
                let s = z / z.conj();
                top(&d.minus, z.conj().inv()).conj() * s * s
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `II₀` of both ends after deforming by `t·μ(d)`.
    pub fn qf_ii0(&self, d: &TangentPair, t: f64) -> Result<EndSchwarzians> {
        let mu = self.beltrami(d)?.scaled(t)?;
        self.ends(&mu)
    }

    fn ends(&self, mu: &BeltramiField) -> Result<EndSchwarzians> {
        let f = self.solver.solve(mu)?;
        let opts = self.options.theodorsen;
        let keep = (opts.nodes / 4).max(self.options.degree + 4);
        let top = theodorsen(|s| f.eval(C64::from_polar(1.0, s)), opts)?;
        let bottom = theodorsen(|s| Ok(f.eval(C64::from_polar(1.0, -s))?.inv()), opts)?;
        let plus = top.series.truncated(keep).schwarzian()?.truncated(self.options.degree).scale(C64::new(-1.0, 0.0));
        let minus = bottom.series.truncated(keep).schwarzian()?.truncated(self.options.degree);
        let minus = PowerSeries::new(minus.coeffs.iter().map(|c| -c.conj()).collect());
        Ok(EndSchwarzians { plus, minus, leakage: top.leakage.max(bottom.leakage), solver_residual: f.residual_l2 })
    }

    /// Central differences of `qf_ii0` over the configured amplitudes, extrapolated in `t²`.
    pub fn dii0_linear_response(&self, d: &TangentPair) -> Result<LinearResponse> {
        let unit = self.beltrami(d)?;
        if unit.sup_norm == 0.0 {
            return Err(Error::Structural("zero deformation direction".into()));
        }
        let cap = self.options.solver.mu_cap;
        let amplitudes: Vec<f64> = self.options.amplitudes.iter().map(|a| a * cap / unit.sup_norm).collect();
        let n = self.options.degree;
        let mut raw_plus = Vec::new();
        let mut raw_minus = Vec::new();
        let mut forward_norms = Vec::new();
        let (mut leakage, mut residual) = (0.0f64, 0.0f64);
        for &t in &amplitudes {
            let a = self.ends(&unit.scaled(t)?)?;
            let b = self.ends(&unit.scaled(-t)?)?;
            leakage = leakage.max(a.leakage).max(b.leakage);
            residual = residual.max(a.solver_residual).max(b.solver_residual);
            let diff = |x: &PowerSeries, y: &PowerSeries| -> Vec<C64> { (0..n).map(|k| (x.coeff(k) - y.coeff(k)) / (2.0 * t)).collect() };
            raw_plus.push(diff(&a.plus, &b.plus));
            raw_minus.push(diff(&a.minus, &b.minus));
            let (p, m) = (a.plus.truncated(n).coeffs, a.minus.truncated(n).coeffs);
            forward_norms.push((coeff_inner(&p, &p) + coeff_inner(&m, &m)).sqrt());
        }
        let plus = richardson_coeffs(&raw_plus, &amplitudes);
        let minus = richardson_coeffs(&raw_minus, &amplitudes);
        let table = |raw: &[Vec<C64>]| {
            let est: Vec<f64> = raw.iter().map(|r| coeff_norm(r)).collect();
            let mut t = RichardsonTable::build(&amplitudes, &est, 2, 2);
            t.differences = raw.windows(2).map(|w| coeff_norm(&w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect::<Vec<_>>())).collect();
            t
        };
        let (table_plus, table_minus) = (table(&raw_plus), table(&raw_minus));
        let scale = coeff_norm(&raw_plus[0]).max(coeff_norm(&raw_minus[0])).max(d.norm_sqr().sqrt() * 0.25);
        let floor = self.options.noise_floor * scale;
        if !table_plus.is_monotone(floor) || !table_minus.is_monotone(floor) {
            let mut diffs = table_plus.differences.clone();
            diffs.extend(&table_minus.differences);
            return Err(Error::StepSize(diffs));
        }
        let b = self.options.basis_degree;
        let outside = |r: &[C64]| coeff_norm(&r[b.min(r.len())..].iter().map(|c| *c).collect::<Vec<_>>());
        let total = (coeff_inner(&plus, &plus) + coeff_inner(&minus, &minus)).sqrt();
        let off = (outside(&plus).powi(2) + outside(&minus).powi(2)).sqrt();
        let projection_residual = if total > 0.0 { off / total } else { 0.0 };
        Ok(LinearResponse {
            plus,
            minus,
            amplitudes,
            sup_mu: unit.sup_norm,
            table_plus,
            table_minus,
            forward_norms,
            projection_residual,
            leakage,
            solver_residual: residual,
        })
    }

    /// Independent responses for a batch of directions.
    pub fn responses(&self, directions: &[TangentPair]) -> Vec<Result<LinearResponse>> {
        directions.par_iter().map(|d| self.dii0_linear_response(d)).collect()
    }
}

/// Coefficient-wise Richardson extrapolation of central differences in powers of `t²`.
fn richardson_coeffs(raw: &[Vec<C64>], steps: &[f64]) -> Vec<C64> {
    let mut level = raw.to_vec();
    for j in 1..raw.len() {
        level = (0..level.len() - 1)
            .map(|i| {
                let p = (steps[i] / steps[i + 1]).powi(2 * j as i32);
                level[i + 1].iter().zip(&level[i]).map(|(h, l)| (h * p - l) / (p - 1.0)).collect()
            })
            .collect();
    }
    level.into_iter().next().unwrap_or_default()
}

/// `DV_R(v) = −¼⟨⟨v, II₀⟩⟩` with the pairing taken over the nodes of `ii0`.
pub fn vr_first_variation(v: &RqVector, ii0: &MetricField) -> Result<f64> {
    let vf = ii0.sample_like(v);
    Ok(-0.25 * vf.inner(ii0, &HyperbolicDensity::disk())?)
}

/// `Hess V_R(v, w) = −¼(⟨v₊, D II₀⁺(w)⟩ + ⟨v₋, D II₀⁻(w)⟩)` from a measured response to `w`.
pub fn vr_hessian_fd(v: &TangentPair, w_response: &LinearResponse) -> f64 {
    let n = w_response.plus.len();
    -0.25 * (coeff_inner(&v.plus_coeffs(n), &w_response.plus) + coeff_inner(&v.minus_coeffs(n), &w_response.minus))
}

#[derive(Clone, Debug, Serialize)]
pub struct AcylindricalHessian {
    pub value: f64,
    /// Set when the value is not positive, which requires `dσ` to break the bound `‖dσ‖ < 1`.
    pub violates_contraction: bool,
}

/// `(1/16)⟨v, v − dσ v⟩` on orthonormal `RQ` coefficients.
pub fn acylindrical_hessian(dsigma: &SkinningOperator, v: &DVector<f64>) -> Result<AcylindricalHessian> {
    if v.norm() == 0.0 {
        return Err(Error::Structural("zero tangent vector".into()));
    }
    let dv = dsigma.apply(v)?;
    let value = v.dot(&(v - dv)) / 16.0;
    Ok(AcylindricalHessian { value, violates_contraction: value <= 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{rq_inner_product, QuadratureRule};
    use crate::tensor::TensorSample;
    use nalgebra::DMatrix;

    fn mono(k: usize, c: C64) -> RqVector {
        let mut s = vec![C64::new(0.0, 0.0); k + 1];
        s[k] = c;
        disk_vector(&s)
    }

    fn small_lab() -> HessianLab {
        HessianLab::new(LabOptions { grid_size: 128, degree: 12, basis_degree: 8, ..LabOptions::default() }).unwrap()
    }

    #[test]
    fn coefficient_pairing_matches_quadrature() {
        let a = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.5), C64::new(-0.3, 0.2)];
        let b = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.2, -1.0), C64::new(0.7, 0.1)];
        let q = rq_inner_product(&disk_vector(&a), &disk_vector(&b), QuadratureRule::default()).unwrap();
        assert!((q - coeff_inner(&a, &b)).abs() < 1e-10, "{q} {}", coeff_inner(&a, &b));
    }

    #[test]
    fn tangent_pair_constructors() {
        let v = mono(3, C64::new(1.0, 0.0));
        let d = TangentPair::antidiagonal(v.clone()).unwrap();
        assert_eq!(d.minus_coeffs(4)[3], C64::new(-1.0, 0.0));
        let (p, m) = d.predicted_response(4);
        assert_eq!(p[3], C64::new(-0.5, 0.0));
        assert_eq!(m[3], C64::new(0.5, 0.0));
        let (p, _) = TangentPair::diagonal(v.clone()).unwrap().predicted_response(4);
        assert!(p.iter().all(|c| c.norm() == 0.0));
        assert!(TangentPair::one_sided(mono(1, C64::new(1.0, 0.0))).is_err());
        let octagon = SeriesTerms::new(Arc::new(FuchsianGroup::octagon()), 0);
        let w = RqVector::new(poincare_series(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)], &octagon).unwrap());
        assert!(TangentPair::one_sided(w).is_err());
    }

    #[test]
    fn first_variation_closed_forms() {
        let g = Grid::centered(64, 0.6);
        let v = mono(2, C64::new(1.0, 0.0));
        let zero = MetricField::from_fn(g, |_| true, |_| TensorSample::ZERO);
        assert_eq!(vr_first_variation(&v, &zero).unwrap(), 0.0);
        let lambda = 0.7;
        let ii0 = zero.sample_like(&v).map(|t| t.scale(-lambda));
        let vf = zero.sample_like(&v);
        let expected = lambda / 4.0 * vf.inner(&vf, &HyperbolicDensity::disk()).unwrap();
        assert!((vr_first_variation(&v, &ii0).unwrap() - expected).abs() < 1e-14);
        let orth = zero.sample_like(&mono(2, C64::new(0.0, 1.0)));
        assert!(vr_first_variation(&v, &orth).unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_is_fuchsian() {
        let lab = small_lab();
        let d = TangentPair::one_sided(mono(2, C64::new(1.0, 0.0))).unwrap();
        let e = lab.qf_ii0(&d, 0.0).unwrap();
        assert!(coeff_norm(&e.plus.coeffs) < 1e-10 && coeff_norm(&e.minus.coeffs) < 1e-10);
    }

    #[test]
    fn one_sided_response_on_a_coarse_grid() {
        let lab = small_lab();
        let v = mono(2, C64::new(1.0, 0.0));
        let d = TangentPair::one_sided(v).unwrap();
        let r = lab.dii0_linear_response(&d).unwrap();
        let target = d.predicted_response(r.plus.len());
        assert!(r.end_error(true, &target.0) < 0.1, "{}", r.end_error(true, &target.0));
        assert!(r.end_error(false, &target.1) < 0.1, "{}", r.end_error(false, &target.1));
        assert!(r.projection_residual < 0.05);
    }

    #[test]
    fn acylindrical_closed_forms() {
        let v = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let h = acylindrical_hessian(&SkinningOperator::scalar(3, 0.0), &v).unwrap();
        assert!((h.value - 9.0 / 16.0).abs() < 1e-15 && !h.violates_contraction);
        let h = acylindrical_hessian(&SkinningOperator::scalar(3, 0.5), &v).unwrap();
        assert!((h.value - 9.0 / 32.0).abs() < 1e-15);
        let op = SkinningOperator::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.2, 0.1, 0.1]))).unwrap();
        let e = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(acylindrical_hessian(&op, &e).unwrap().violates_contraction);
        assert!(acylindrical_hessian(&SkinningOperator::scalar(2, 0.5), &v).is_err());
        assert!(acylindrical_hessian(&op, &DVector::zeros(3)).is_err());
    }
}
