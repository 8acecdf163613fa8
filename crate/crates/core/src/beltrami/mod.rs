//! Beltrami coefficients, the quasiconformal solver, and pulled-back metrics.

mod field;
mod metric;
mod solver;

pub use field::{mu_from_fn, mu_from_phi, reflect_across_circle, BeltramiField};
pub use metric::{metric_variation, pullback_at, pullback_metric, MetricField, MetricVariation, VariationOptions};
pub use solver::{BeltramiSolver, Normalization, QCMap, SolverOptions};
