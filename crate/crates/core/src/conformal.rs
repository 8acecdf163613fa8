//! Conformal maps of the unit disk onto star-shaped Jordan domains (Theodorsen's method).

use crate::error::{Error, Result};
use crate::series::PowerSeries;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct TheodorsenOptions {
    /// Samples of the boundary curve used to tabulate its polar graph.
    pub curve_samples: usize,
    /// Collocation points on the unit circle (power of two).
    pub nodes: usize,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for TheodorsenOptions {
    fn default() -> Self {
        Self { curve_samples: 8192, nodes: 512, tol: 1e-14, max_iterations: 200 }
    }
}

/// Conformal map `F` of the disk onto the interior of a curve, with `F(0) = 0` and `F′(0) > 0`.
#[derive(Clone, Debug)]
pub struct ConformalMap {
    pub series: PowerSeries,
    /// Largest negative-frequency coefficient of the boundary values (should vanish).
    pub leakage: f64,
    pub iterations: usize,
}

/// Polar graph `r(θ)` of a closed curve winding once counterclockwise around 0.
struct PolarGraph {
    angles: Vec<f64>,
    radii: Vec<f64>,
}

impl PolarGraph {
    fn new(points: &[C64]) -> Result<Self> {
        let mut angles = Vec::with_capacity(points.len() + 1);
        let mut prev = points[0].arg();
        angles.push(prev);
        for p in &points[1..] {
            let mut a = p.arg();
            while a - prev > PI {
                a -= 2.0 * PI;
            }
            while a - prev < -PI {
                a += 2.0 * PI;
            }
            if a <= prev {
                return Err(Error::Conformal("boundary curve is not star-shaped about the origin".into()));
            }
            angles.push(a);
            prev = a;
        }
        if (angles[points.len() - 1] - angles[0] - 2.0 * PI).abs() > PI {
            return Err(Error::Conformal("boundary curve does not wind once around the origin".into()));
        }
        let mut radii: Vec<f64> = points.iter().map(|p| p.norm()).collect();
        angles.push(angles[0] + 2.0 * PI);
        radii.push(radii[0]);
        Ok(Self { angles, radii })
    }

    fn radius(&self, theta: f64) -> f64 {
        let a0 = self.angles[0];
        let t = (theta - a0).rem_euclid(2.0 * PI) + a0;
        let k = self.angles.partition_point(|&a| a <= t).clamp(1, self.angles.len() - 1);
        let (ta, tb) = (self.angles[k - 1], self.angles[k]);
        let s = (t - ta) / (tb - ta);
        self.radii[k - 1] * (1.0 - s) + self.radii[k] * s
    }
}

/// Solves `θ(φ) = φ + K[log r(θ)](φ)` where `K` is the periodic conjugate function.
pub fn theodorsen(curve: impl Fn(f64) -> Result<C64>, options: TheodorsenOptions) -> Result<ConformalMap> {
    let m = options.nodes;
    let samples: Result<Vec<C64>> = (0..options.curve_samples).map(|j| curve(2.0 * PI * j as f64 / options.curve_samples as f64)).collect();
    let graph = PolarGraph::new(&samples?)?;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let phis: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    let conj = |u: &[f64]| -> Vec<f64> {
        let mut buf: Vec<C64> = u.iter().map(|&x| C64::new(x, 0.0)).collect();
        fwd.process(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            let sign = if k == 0 || k == m / 2 { 0.0 } else if k < m / 2 { 1.0 } else { -1.0 };
            *b *= C64::new(0.0, -sign);
        }
        inv.process(&mut buf);
        buf.iter().map(|b| b.re / m as f64).collect()
    };
    let mut theta = phis.clone();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let logs: Vec<f64> = theta.iter().map(|&t| graph.radius(t).ln()).collect();
        let k = conj(&logs);
        let next: Vec<f64> = phis.iter().zip(&k).map(|(p, k)| p + k).collect();
        let diff = next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        theta = next;
        if diff < options.tol {
            break;
        }
        if iterations >= options.max_iterations || !diff.is_finite() {
            return Err(Error::Conformal(format!("no convergence after {iterations} iterations (last change {diff:.2e})")));
        }
    }
    let mut boundary: Vec<C64> = theta.iter().map(|&t| C64::from_polar(graph.radius(t), t)).collect();
    fwd.process(&mut boundary);
    let coeffs: Vec<C64> = boundary.iter().map(|c| c / m as f64).collect();
    let leakage = coeffs[m / 2 + 1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(ConformalMap { series: PowerSeries::new(coeffs[..m / 2].to_vec()), leakage, iterations })
}
