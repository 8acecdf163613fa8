use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} lies outside the model domain")]
    Domain(Complex64),
    #[error("degenerate matrix: determinant {0}")]
    Degenerate(Complex64),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("poincare series diverges: residuals {residuals:?}")]
    Divergence { residuals: Vec<f64> },
    #[error("beltrami coefficient too large: |mu| = {sup} at {location}")]
    MuTooLarge { sup: f64, location: Complex64 },
    #[error("beltrami iteration failed to contract after {iterations} iterations (|mu|_inf = {sup})")]
    SolverFailure { sup: f64, iterations: usize },
    #[error("point {0} lies outside the sampled range")]
    Extrapolation(Complex64),
    #[error("vanishing derivative at {0}")]
    CriticalPoint(Complex64),
    #[error("metric is not positive definite at sample {0}")]
    Metric(usize),
    #[error("richardson table is not converging: {0:?}")]
    StepSize(Vec<f64>),
    #[error("degenerate metric along the path at t = {0}")]
    Path(f64),
    #[error("flow step rejected {0} times in a row")]
    Stiffness(usize),
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("conformal map iteration did not converge: {0}")]
    Conformal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
