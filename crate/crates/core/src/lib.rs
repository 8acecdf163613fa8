//! Numerical laboratory for the variational theory of renormalized volume.
//!
//! The crate covers quasiconformal deformations of hyperbolic surfaces, tensors at
//! infinity built from Schwarzian derivatives, the W-volume and its Ricci flow on
//! triangulated surfaces, finite-difference Hessians at Fuchsian points, and the
//! bookkeeping of the corrected renormalized volume.

pub mod beltrami;
pub mod conformal;
pub mod corrected;
pub mod density;
pub mod epstein;
pub mod error;
pub mod fft2;
pub mod fuchsian;
pub mod gauss;
pub mod grid;
pub mod hessian;
pub mod moebius;
pub mod richardson;
pub mod series;
pub mod tensor;
pub mod wvol;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
