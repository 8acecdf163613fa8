//! Richardson extrapolation over halving step sequences.

use serde::Serialize;

/// Extrapolation table built from estimates at steps `h, h/2, h/4, ...`.
#[derive(Clone, Debug, Serialize)]
pub struct RichardsonTable {
    pub steps: Vec<f64>,
    /// `rows[k][j]` is the `j`-times extrapolated value using estimates `k-j..=k`.
    pub rows: Vec<Vec<f64>>,
    /// Successive differences of the raw estimates.
    pub differences: Vec<f64>,
}

impl RichardsonTable {
    /// `order` is the leading error exponent of the raw estimates and `step_order` the gap
    /// between successive exponents. Steps are assumed to shrink by a constant ratio.
    pub fn build(steps: &[f64], estimates: &[f64], order: u32, step_order: u32) -> Self {
        assert_eq!(steps.len(), estimates.len());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for k in 0..estimates.len() {
            let mut row = vec![estimates[k]];
            for j in 1..=k {
                let ratio = steps[k - 1] / steps[k];
                let p = ratio.powi((order + (j as u32 - 1) * step_order) as i32);
                let v = (p * row[j - 1] - rows[k - 1][j - 1]) / (p - 1.0);
                row.push(v);
            }
            rows.push(row);
        }
        let differences = estimates.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        Self { steps: steps.to_vec(), rows, differences }
    }

    pub fn best(&self) -> f64 {
        *self.rows.last().and_then(|r| r.last()).expect("non-empty table")
    }

    /// Difference between the two most extrapolated entries available.
    pub fn error_estimate(&self) -> f64 {
        let n = self.rows.len();
        if n < 2 {
            return f64::INFINITY;
        }
        (self.rows[n - 1][n - 1] - self.rows[n - 1][n - 2]).abs()
    }

    /// True when successive raw differences shrink, or are already below `floor`.
    pub fn is_monotone(&self, floor: f64) -> bool {
        self.differences.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor)
    }

    /// Observed order `log2(d_{k}/d_{k+1})` from the first pair of differences.
    pub fn observed_order(&self) -> Option<f64> {
        if self.differences.len() < 2 || self.differences[1] <= 0.0 {
            return None;
        }
        let ratio = self.steps[0] / self.steps[1];
        Some((self.differences[0] / self.differences[1]).ln() / ratio.ln())
    }
}
