//! Conformal densities `ρ |dz|²`.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    UpperHalfPlane,
    Disk,
}

/// Anything that assigns a positive density to points of its domain.
pub trait ConformalDensity: Sync {
    fn eval(&self, z: C64) -> Result<f64>;
}

/// The complete hyperbolic metric of curvature −1 on the upper half-plane or the disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicDensity {
    pub model: Model,
}

impl HyperbolicDensity {
    pub fn new(model: Model) -> Self {
        Self { model }
    }

    pub fn disk() -> Self {
        Self::new(Model::Disk)
    }

    pub fn upper_half_plane() -> Self {
        Self::new(Model::UpperHalfPlane)
    }

    pub fn contains(&self, z: C64) -> bool {
        match self.model {
            Model::UpperHalfPlane => z.im > 0.0,
            Model::Disk => z.norm_sqr() < 1.0,
        }
    }
}

impl ConformalDensity for HyperbolicDensity {
    fn eval(&self, z: C64) -> Result<f64> {
        hyperbolic_density(self.model, z)
    }
}

/// Constant density, useful as a flat test metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatDensity(pub f64);

impl ConformalDensity for FlatDensity {
    fn eval(&self, _z: C64) -> Result<f64> {
        Ok(self.0)
    }
}

pub fn hyperbolic_density(model: Model, z: C64) -> Result<f64> {
    match model {
        Model::UpperHalfPlane if z.im > 0.0 && z.is_finite() => Ok(1.0 / (z.im * z.im)),
        Model::Disk if z.norm_sqr() < 1.0 => {
            let s = 1.0 - z.norm_sqr();
            Ok(4.0 / (s * s))
        }
        _ => Err(Error::Domain(z)),
    }
}
