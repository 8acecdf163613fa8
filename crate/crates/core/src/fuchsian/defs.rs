use super::group::{FuchsianGroup, FundamentalDomain};
use super::poincare::{poincare_series, QuadDifferential, SeriesTerms};
use crate::error::{Error, Result};
use crate::moebius::MoebiusMap;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Group definition as it appears in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    Trivial,
    Octagon,
    Cyclic { ell: f64 },
    /// Real unimodular matrices acting on the upper half-plane, one `[a, b, c, d]` row each.
    /// No fundamental domain is attached, so residual checks sample the whole disk.
    Matrices { name: String, generators: Vec<[f64; 4]> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<FuchsianGroup> {
        Ok(match self {
            GroupSpec::Trivial => FuchsianGroup::trivial(),
            GroupSpec::Octagon => FuchsianGroup::octagon(),
            GroupSpec::Cyclic { ell } => {
                if !(ell.is_finite() && *ell > 0.0) {
                    return Err(Error::Structural(format!("translation length {ell} must be positive")));
                }
                FuchsianGroup::cyclic(*ell)
            }
            GroupSpec::Matrices { name, generators } => {
                let mut gens = Vec::with_capacity(generators.len());
                for (k, m) in generators.iter().enumerate() {
                    let det = m[0] * m[3] - m[1] * m[2];
                    if !((det - 1.0).abs() < 1e-9) {
                        return Err(Error::Structural(format!("generator {k} has determinant {det}, expected 1")));
                    }
                    gens.push(MoebiusMap::from_real(m[0], m[1], m[2], m[3])?);
                }
                FuchsianGroup::new(name.clone(), gens, FundamentalDomain::Disk)?
            }
        })
    }
}

/// Polynomial seed `Σ cₙzⁿ` (disk coordinate) and the word-length cutoff of its Poincaré series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub coefficients: Vec<[f64; 2]>,
    pub cutoff: usize,
}

impl SeedSpec {
    pub fn coefficients(&self) -> Vec<C64> {
        self.coefficients.iter().map(|c| C64::new(c[0], c[1])).collect()
    }

    pub fn build(&self, group: Arc<FuchsianGroup>) -> Result<QuadDifferential> {
        if self.coefficients.is_empty() {
            return Err(Error::Structural("empty seed".into()));
        }
        poincare_series(&self.coefficients(), &SeriesTerms::new(group, self.cutoff))
    }
}
