use crate::density::ConformalDensity;
use crate::error::{Error, Result};
use crate::fuchsian::QuadDifferential;
use crate::grid::{Grid, GridField};
use num_complex::Complex64 as C64;

/// Sampled Beltrami coefficient on a grid, zero outside the sampled square.
#[derive(Clone, Debug)]
pub struct BeltramiField {
    pub field: GridField<C64>,
    pub sup_norm: f64,
    pub sup_location: C64,
}

impl BeltramiField {
    pub fn new(field: GridField<C64>) -> Result<Self> {
        let mut sup = 0.0;
        let mut loc = field.grid.point(0);
        for (k, m) in field.data.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::MuTooLarge { sup: f64::INFINITY, location: field.grid.point(k) });
            }
            if m.norm() > sup {
                sup = m.norm();
                loc = field.grid.point(k);
            }
        }
        if sup >= 1.0 {
            return Err(Error::MuTooLarge { sup, location: loc });
        }
        Ok(Self { field, sup_norm: sup, sup_location: loc })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(C64) -> C64 + Sync) -> Result<Self> {
        Self::new(GridField::from_fn(grid, f))
    }

    pub fn zero(grid: Grid) -> Self {
        Self::new(GridField { grid, data: vec![C64::new(0.0, 0.0); grid.len()] }).expect("zero field")
    }

    pub fn grid(&self) -> &Grid {
        &self.field.grid
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(GridField { grid: self.field.grid, data: self.field.data.iter().map(|m| m * t).collect() })
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if !self.grid().same_as(other.grid()) {
            return Err(Error::Structural("beltrami fields on different grids".into()));
        }
        let data = self.field.data.iter().zip(&other.field.data).map(|(x, y)| x * a + y * b).collect();
        Self::new(GridField { grid: *self.grid(), data })
    }
}

/// `μ = φ̄ / (2ρ)` wherever the density is defined, zero elsewhere.
pub fn mu_from_phi(phi: &QuadDifferential, rho: &dyn ConformalDensity, grid: Grid) -> Result<BeltramiField> {
    mu_from_fn(|z| phi.eval(z), rho, grid)
}

/// Same as [`mu_from_phi`] for any holomorphic function given pointwise.
pub fn mu_from_fn(phi: impl Fn(C64) -> C64 + Sync, rho: &dyn ConformalDensity, grid: Grid) -> Result<BeltramiField> {
    BeltramiField::from_fn(grid, |z| match rho.eval(z) {
        Ok(r) => phi(z).conj() / (2.0 * r),
        Err(_) => C64::new(0.0, 0.0),
    })
}

/// Extends a coefficient supported in the unit disk to its exterior so that the
/// solution commutes with the reflection `z ↦ 1/z̄` and maps the disk to itself.
pub fn reflect_across_circle(mu: impl Fn(C64) -> C64 + Sync, grid: Grid) -> Result<BeltramiField> {
    BeltramiField::from_fn(grid, |z| {
        let r2 = z.norm_sqr();
        if r2 < 1.0 {
            mu(z)
        } else if r2 > 1.0 {
            let w = z.conj().inv();
            let s = z / z.conj();
            mu(w).conj() * s * s
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
