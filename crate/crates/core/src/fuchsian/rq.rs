use super::poincare::QuadDifferential;
use super::quadrature::{domain_nodes, QuadratureRule};
use crate::density::hyperbolic_density;
use crate::density::Model;
use crate::error::{Error, Result};
use crate::tensor::TensorSample;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// The real tensor `Re(φ dz²)` attached to a holomorphic quadratic differential.
#[derive(Clone, Debug)]
pub struct RqVector {
    pub phi: QuadDifferential,
}

impl RqVector {
    pub fn new(phi: QuadDifferential) -> Self {
        Self { phi }
    }

    pub fn tensor_at(&self, z: C64) -> TensorSample {
        TensorSample::new(self.phi.eval(z), 0.0)
    }

    pub fn scaled(&self, a: f64) -> RqVector {
        RqVector::new(self.phi.scaled(C64::new(a, 0.0)))
    }

    pub fn add(&self, other: &RqVector) -> Result<RqVector> {
        Ok(RqVector::new(self.phi.combine(C64::new(1.0, 0.0), &other.phi, C64::new(1.0, 0.0))?))
    }
}

/// `∫_R ⟨v, w⟩ da` over the fundamental domain with the hyperbolic metric.
pub fn rq_inner_product(v: &RqVector, w: &RqVector, rule: QuadratureRule) -> Result<f64> {
    if !v.phi.group().same_as(w.phi.group()) {
        return Err(Error::Structural("inner product of vectors over different groups".into()));
    }
    let nodes = domain_nodes(&v.phi.group().domain, rule);
    Ok(nodes
        .par_iter()
        .map(|n| {
            let rho = hyperbolic_density(Model::Disk, n.z).expect("quadrature node inside the disk");
            n.weight * rho * v.tensor_at(n.z).inner(&w.tensor_at(n.z), rho)
        })
        .sum())
}

/// Gram matrix of a family of vectors.
pub fn gram_matrix(basis: &[RqVector], rule: QuadratureRule) -> Result<nalgebra::DMatrix<f64>> {
    let n = basis.len();
    let mut g = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rq_inner_product(&basis[i], &basis[j], rule)?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}
