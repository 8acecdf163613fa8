use crate::beltrami::MetricField;
use crate::density::ConformalDensity;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::tensor::TensorSample;
use serde::Serialize;

/// Real 2×2 matrix `[[a, b], [c, d]]` in the coordinates `(x, y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn from_tensor(t: &TensorSample) -> Self {
        let [xx, xy, yy] = t.to_matrix();
        Mat2([[xx, xy], [xy, yy]])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut r = [[0.0; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }

    pub fn transpose(&self) -> Mat2 {
        let a = self.0;
        Mat2([[a[0][0], a[1][0]], [a[0][1], a[1][1]]])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        let a = self.0;
        Some(Mat2([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]))
    }

    /// Symmetric part as a tensor sample.
    pub fn to_tensor(&self) -> TensorSample {
        let a = self.0;
        TensorSample::from_matrix([a[0][0], 0.5 * (a[0][1] + a[1][0]), a[1][1]])
    }
}

/// Limit tensors at infinity attached to a conformal metric `I` and a traceless `II₀`.
#[derive(Clone, Debug)]
pub struct InfinityTensors {
    pub grid: Grid,
    /// Nodes where every tensor is defined (curvature needs the four neighbours).
    pub support: Vec<bool>,
    pub i: Vec<TensorSample>,
    pub ii: Vec<TensorSample>,
    pub iii: Vec<TensorSample>,
    pub ii0: Vec<TensorSample>,
    /// Shape operator `I⁻¹ II`.
    pub b: Vec<Mat2>,
    pub h: Vec<f64>,
    pub k: Vec<f64>,
}

impl InfinityTensors {
    pub fn i_field(&self) -> MetricField {
        self.field(&self.i)
    }

    pub fn ii_field(&self) -> MetricField {
        self.field(&self.ii)
    }

    pub fn iii_field(&self) -> MetricField {
        self.field(&self.iii)
    }

    fn field(&self, s: &[TensorSample]) -> MetricField {
        MetricField { grid: self.grid, samples: s.to_vec(), support: self.support.clone() }
    }

    /// Largest violation of `II = II₀ + (H/2)I`, `III = I(B·,B·)` and `H = −K` over the support.
    pub fn identity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.grid.len() {
            if !self.support[k] {
                continue;
            }
            let scale = self.i[k].e.abs().max(1e-300);
            let ii = self.ii0[k].add(&self.i[k].scale(0.5 * self.h[k]));
            worst = worst.max((ii.q - self.ii[k].q).norm() / scale).max((ii.e - self.ii[k].e).abs() / scale);
            let im = Mat2::from_tensor(&self.i[k]);
            let b = self.b[k];
            let iii = b.transpose().mul(&im).mul(&b).to_tensor();
            worst = worst.max((iii.q - self.iii[k].q).norm() / scale).max((iii.e - self.iii[k].e).abs() / scale);
            worst = worst.max((self.h[k] + self.k[k]).abs());
        }
        worst
    }
}

/// Builds `K`, `H = −K`, `II = II₀ + (H/2)I`, `B = I⁻¹II` and `III = I(B·,B·)`.
///
/// `I` must be conformal and positive; its curvature comes from the five-point Laplacian
/// of the log conformal factor.
pub fn assemble_infinity_tensors(i: &MetricField, ii0: &MetricField) -> Result<InfinityTensors> {
    if !i.grid.same_as(&ii0.grid) {
        return Err(Error::Structural("I and II0 on different grids".into()));
    }
    let g = i.grid;
    for k in 0..g.len() {
        if !i.support[k] {
            continue;
        }
        let t = &i.samples[k];
        if !(t.e > 0.0) || t.q.norm() >= t.e {
            return Err(Error::Metric(k));
        }
        if t.q.norm() > 1e-10 * t.e {
            return Err(Error::Structural(format!("I is not conformal at sample {k}")));
        }
        if ii0.support[k] && ii0.samples[k].e.abs() > 1e-10 * ii0.samples[k].q.norm().max(t.e) {
            return Err(Error::Structural(format!("II0 is not traceless at sample {k}")));
        }
    }
    let phi: Vec<f64> = i.samples.iter().map(|t| 0.5 * t.e.max(1e-300).ln()).collect();
    let n = g.len();
    let mut support = vec![false; n];
    let mut kk = vec![0.0; n];
    for k in 0..n {
        let (x, y) = g.ij(k);
        if x == 0 || y == 0 || x + 1 >= g.nx || y + 1 >= g.ny {
            continue;
        }
        let nb = [g.index(x + 1, y), g.index(x - 1, y), g.index(x, y + 1), g.index(x, y - 1)];
        if !i.support[k] || !ii0.support[k] || nb.iter().any(|&m| !i.support[m]) {
            continue;
        }
        let lap = (nb.iter().map(|&m| phi[m]).sum::<f64>() - 4.0 * phi[k]) / (g.h * g.h);
        kk[k] = -(-2.0 * phi[k]).exp() * lap;
        support[k] = true;
    }
    let mut out = InfinityTensors {
        grid: g,
        support,
        i: i.samples.clone(),
        ii: vec![TensorSample::ZERO; n],
        iii: vec![TensorSample::ZERO; n],
        ii0: ii0.samples.clone(),
        b: vec![Mat2::default(); n],
        h: vec![0.0; n],
        k: kk,
    };
    for k in 0..n {
        if !out.support[k] {
            continue;
        }
        let h = -out.k[k];
        let ii = out.ii0[k].add(&out.i[k].scale(0.5 * h));
        let im = Mat2::from_tensor(&out.i[k]);
        let b = im.inverse().ok_or(Error::Metric(k))?.mul(&Mat2::from_tensor(&ii));
        out.iii[k] = b.transpose().mul(&im).mul(&b).to_tensor();
        out.ii[k] = ii;
        out.b[k] = b;
        out.h[k] = h;
    }
    Ok(out)
}

/// Result of testing `D III = D II₀ + ¼ D I` against a basis of `RQ`.
#[derive(Clone, Debug, Serialize)]
pub struct DiiiReport {
    pub inner_products: Vec<f64>,
    /// `tol·‖D I‖·‖bⱼ‖` for each basis element.
    pub thresholds: Vec<f64>,
    pub pass: bool,
}

pub fn diii_orthogonality_check(
    d_ii0: &MetricField,
    d_i: &MetricField,
    basis: &[MetricField],
    rho: &dyn ConformalDensity,
    tol: f64,
) -> Result<DiiiReport> {
    let d_iii = d_ii0.combine(1.0, d_i, 0.25)?;
    let scale = d_i.norm(rho)?.max(d_ii0.norm(rho)?);
    let mut inner_products = Vec::new();
    let mut thresholds = Vec::new();
    for b in basis {
        inner_products.push(d_iii.inner(b, rho)?);
        thresholds.push(tol * scale * b.norm(rho)?);
    }
    let pass = inner_products.iter().zip(&thresholds).all(|(ip, t)| ip.abs() <= *t);
    Ok(DiiiReport { inner_products, thresholds, pass })
}
