//! Square 2D FFTs on row-major buffers.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse; divide by `n²` to invert [`Fft2::forward`].
    pub fn inverse(&self, data: &mut [C64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        data.par_chunks_mut(n).for_each(|row| plan.process(row));
        transpose(data, n);
        data.par_chunks_mut(n).for_each(|row| plan.process(row));
        transpose(data, n);
    }
}

fn transpose(data: &mut [C64], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_delta() {
        let n = 16;
        let f = Fft2::new(n);
        let mut d: Vec<C64> = (0..n * n).map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect();
        let orig = d.clone();
        f.forward(&mut d);
        f.inverse(&mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-13);
        }
        let mut delta = vec![C64::new(0.0, 0.0); n * n];
        delta[n + 2] = C64::new(1.0, 0.0);
        f.forward(&mut delta);
        let (k, l) = (3usize, 5usize);
        let expect = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((2 * k) as f64 + l as f64) / n as f64);
        assert!((delta[l * n + k] - expect).norm() < 1e-13);
    }
}
