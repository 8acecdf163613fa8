//! Corrected renormalized volume: definition, gluing bookkeeping and the Hessian at the
//! geodesic class. Vectors are coefficient vectors in an orthonormal basis of `RQ`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Derivative of the skinning map acting on `RQ` coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkinningOperator {
    pub matrix: DMatrix<f64>,
    /// Certified bound on the spectrum of the symmetric part, if the supplier knows one.
    pub spectral_bound: Option<f64>,
}

impl SkinningOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Structural(format!("skinning operator is {}x{}", matrix.nrows(), matrix.ncols())));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Structural("skinning operator has non-finite entries".into()));
        }
        Ok(Self { matrix, spectral_bound: None })
    }

    pub fn scalar(dim: usize, lambda: f64) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) * lambda, spectral_bound: Some(lambda.abs()) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.transpose()).amax() <= tol * self.matrix.amax().max(1.0)
    }

    pub fn symmetric_part(&self) -> DMatrix<f64> {
        (&self.matrix + self.matrix.transpose()) * 0.5
    }

    /// Ascending eigenvalues of the symmetric part.
    pub fn symmetric_spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.symmetric_part()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(v)?;
        Ok(&self.matrix * v)
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Structural(format!("vector of length {} for operator of size {}", v.len(), self.dim())));
        }
        Ok(())
    }
}

/// `V_R(M) − ½ V_R(∂M × [0,1])`.
pub fn corrected_vr(vr_m: f64, vr_product: f64) -> f64 {
    vr_m - 0.5 * vr_product
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceBoundary {
    pub surface: String,
    /// Identifier of the conformal structure at infinity on this boundary.
    pub conformal: String,
    /// Identifier of its image under the skinning map.
    pub skinning_image: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub id: String,
    pub vr: f64,
    pub boundary: Vec<PieceBoundary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interface {
    pub surface: String,
    pub pieces: Vec<String>,
    /// `V_R` of the product region `Σ × [0,1]` with the two glued conformal structures.
    pub vr_product: f64,
}

/// Pieces glued along incompressible surfaces, with the volume of the closed result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingDescription {
    pub pieces: Vec<Piece>,
    pub interfaces: Vec<Interface>,
    pub closed_volume: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingReport {
    /// `vol − (Σ V_R(Mᵢ) − Σ V_R(Σⱼ × I))`.
    pub residual: f64,
    /// `vol − Σ V̄_R(Mᵢ)` with each interface term split in halves.
    pub corrected_residual: f64,
    pub corrected: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl GluingDescription {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Structural(m));
        if self.pieces.is_empty() {
            return bad("no pieces".into());
        }
        let mut ids = BTreeSet::new();
        for p in &self.pieces {
            if !ids.insert(p.id.as_str()) {
                return bad(format!("duplicate piece id {}", p.id));
            }
            if !p.vr.is_finite() {
                return bad(format!("piece {} has non-finite volume", p.id));
            }
        }
        if !self.closed_volume.is_finite() {
            return bad("closed volume is not finite".into());
        }
        let mut surfaces = BTreeSet::new();
        for i in &self.interfaces {
            if !surfaces.insert(i.surface.as_str()) {
                return bad(format!("surface {} glued twice", i.surface));
            }
            if i.pieces.len() != 2 || i.pieces[0] == i.pieces[1] {
                return bad(format!("interface {} must join two distinct pieces", i.surface));
            }
            if !i.vr_product.is_finite() {
                return bad(format!("interface {} has non-finite volume", i.surface));
            }
            let mut sides = Vec::new();
            for id in &i.pieces {
                let piece = self.pieces.iter().find(|p| &p.id == id);
                let Some(piece) = piece else { return bad(format!("interface {} names unknown piece {id}", i.surface)) };
                let Some(b) = piece.boundary.iter().find(|b| b.surface == i.surface) else {
                    return bad(format!("piece {id} has no boundary {}", i.surface));
                };
                sides.push(b);
            }
            if sides[0].conformal != sides[1].skinning_image || sides[1].conformal != sides[0].skinning_image {
                return bad(format!("conformal data across {} are not each other's skinning images", i.surface));
            }
        }
        for p in &self.pieces {
            for b in &p.boundary {
                if !surfaces.contains(b.surface.as_str()) {
                    return bad(format!("boundary {} of piece {} is not glued", b.surface, p.id));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Structural(format!("gluing description: {e}")))
    }
}

pub fn gluing_identity_check(g: &GluingDescription, tol: f64) -> Result<GluingReport> {
    g.validate()?;
    let pieces: f64 = g.pieces.iter().map(|p| p.vr).sum();
    let products: f64 = g.interfaces.iter().map(|i| i.vr_product).sum();
    let residual = g.closed_volume - (pieces - products);
    let mut corrected = BTreeMap::new();
    for p in &g.pieces {
        let product: f64 = g.interfaces.iter().filter(|i| i.pieces.contains(&p.id)).map(|i| i.vr_product).sum();
        corrected.insert(p.id.clone(), corrected_vr(p.vr, product));
    }
    let corrected_residual = g.closed_volume - corrected.values().sum::<f64>();
    let pass = residual.abs() < tol && corrected_residual.abs() < tol;
    Ok(GluingReport { residual, corrected_residual, corrected, tolerance: tol, pass })
}

/// `8 DV̄_R(v) = −⟨v, II₀⁺⟩ + ⟨dσ v, II₀⁻⟩`; returns `DV̄_R(v)`.
pub fn corrected_first_variation(v: &DVector<f64>, ii0_plus: &DVector<f64>, ii0_minus: &DVector<f64>, dsigma: &SkinningOperator) -> Result<f64> {
    let dv = dsigma.apply(v)?;
    if ii0_plus.len() != v.len() || ii0_minus.len() != v.len() {
        return Err(Error::Structural("II0 coefficient vectors have the wrong length".into()));
    }
    Ok((-v.dot(ii0_plus) + dv.dot(ii0_minus)) / 8.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectedHessian {
    /// `(1/32)⟨v + dσv, v − dσv⟩` with the operator as given.
    pub raw: f64,
    /// Same with `dσ` replaced by its symmetric part.
    pub symmetrized: f64,
    pub raw_positive: bool,
    pub symmetrized_positive: bool,
    pub spectrum: Vec<f64>,
}

pub fn corrected_hessian(dsigma: &SkinningOperator, v: &DVector<f64>) -> Result<CorrectedHessian> {
    let dv = dsigma.apply(v)?;
    let raw = (v + &dv).dot(&(v - &dv)) / 32.0;
    let sv = dsigma.symmetric_part() * v;
    let symmetrized = (v + &sv).dot(&(v - &sv)) / 32.0;
    Ok(CorrectedHessian {
        raw,
        symmetrized,
        raw_positive: raw > 0.0,
        symmetrized_positive: symmetrized > 0.0,
        spectrum: dsigma.symmetric_spectrum(),
    })
}
