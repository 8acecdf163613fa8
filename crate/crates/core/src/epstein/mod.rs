//! Tensors at infinity: Schwarzian derivatives, `II₀`, and the assembled `I, II, III, B, H`.

mod schwarzian;
mod tensors;

pub use schwarzian::{ii0_from_uniformizing_map, ii0_series, schwarzian, schwarzian_at, SchwarzianField};
pub use tensors::{assemble_infinity_tensors, diii_orthogonality_check, DiiiReport, InfinityTensors, Mat2};
