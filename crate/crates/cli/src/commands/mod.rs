//! One module per subcommand. Each runner takes a loaded config and an output directory.

pub mod corrected;
pub mod cusp;
pub mod fields;
pub mod hessian;
pub mod selftest;
pub mod surface;

use std::path::PathBuf;

/// Result of a run: verdict, one-line summary, files written.
#[derive(Debug)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    pub config_hash: String,
    pub written: Vec<PathBuf>,
}

pub(crate) fn parse_c64(v: [f64; 2]) -> num_complex::Complex64 {
    num_complex::Complex64::new(v[0], v[1])
}
