//! Regular square grids of complex sample points.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// `nx × ny` nodes at `origin + h·(i + i·j)`, stored row-major (`index = j·nx + i`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub origin: C64,
    pub h: f64,
}

impl Grid {
    /// `n × n` cell-centred nodes covering the square `[-L, L]²`.
    pub fn centered(n: usize, half_width: f64) -> Self {
        let h = 2.0 * half_width / n as f64;
        Self { nx: n, ny: n, origin: C64::new(-half_width + 0.5 * h, -half_width + 0.5 * h), h }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn node(&self, i: usize, j: usize) -> C64 {
        self.origin + C64::new(self.h * i as f64, self.h * j as f64)
    }

    pub fn point(&self, k: usize) -> C64 {
        let (i, j) = self.ij(k);
        self.node(i, j)
    }

    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Fractional grid coordinates of `z`.
    pub fn locate(&self, z: C64) -> (f64, f64) {
        let d = (z - self.origin) / self.h;
        (d.re, d.im)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.nx == other.nx && self.ny == other.ny && (self.origin - other.origin).norm() < 1e-12 && (self.h - other.h).abs() < 1e-15
    }
}

/// Values attached to the nodes of a [`Grid`].
#[derive(Clone, Debug)]
pub struct GridField<T> {
    pub grid: Grid,
    pub data: Vec<T>,
}

impl<T: Copy + Send + Sync> GridField<T> {
    pub fn from_fn(grid: Grid, f: impl Fn(C64) -> T + Sync) -> Self {
        use rayon::prelude::*;
        let data = (0..grid.len()).into_par_iter().map(|k| f(grid.point(k))).collect();
        Self { grid, data }
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[self.grid.index(i, j)]
    }
}

fn keys_weights(t: f64) -> [f64; 4] {
    // Catmull–Rom cubic convolution weights for nodes -1, 0, 1, 2.
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

impl GridField<C64> {
    /// Bicubic (Catmull–Rom) interpolation. Fails outside the interior where the stencil fits.
    pub fn interpolate(&self, z: C64) -> Result<C64> {
        let g = &self.grid;
        let (x, y) = g.locate(z);
        if !(x >= 1.0 && y >= 1.0 && x <= (g.nx - 2) as f64 && y <= (g.ny - 2) as f64) {
            return Err(Error::Extrapolation(z));
        }
        let i0 = (x.floor() as usize).min(g.nx - 3);
        let j0 = (y.floor() as usize).min(g.ny - 3);
        let wx = keys_weights(x - i0 as f64);
        let wy = keys_weights(y - j0 as f64);
        let mut acc = C64::new(0.0, 0.0);
        for (b, wyb) in wy.iter().enumerate() {
            let row = (j0 + b - 1) * g.nx;
            let mut r = C64::new(0.0, 0.0);
            for (a, wxa) in wx.iter().enumerate() {
                r += self.data[row + i0 + a - 1] * *wxa;
            }
            acc += r * *wyb;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_layout() {
        let g = Grid::centered(4, 1.0);
        assert_eq!(g.h, 0.5);
        assert_eq!(g.node(0, 0), C64::new(-0.75, -0.75));
        assert_eq!(g.point(g.index(3, 1)), C64::new(0.75, -0.25));
    }

    #[test]
    fn interpolation_reproduces_quadratics() {
        let g = Grid::centered(32, 2.0);
        let f = GridField::from_fn(g, |z| z * z + C64::new(0.0, 3.0) * z.conj() + 1.0);
        for z in [C64::new(0.123, -0.77), C64::new(-1.3, 1.1), C64::new(0.0, 0.0)] {
            let exact = z * z + C64::new(0.0, 3.0) * z.conj() + 1.0;
            assert!((f.interpolate(z).unwrap() - exact).norm() < 1e-12);
        }
        assert!(f.interpolate(C64::new(1.99, 0.0)).is_err());
    }
}
