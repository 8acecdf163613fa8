//! The W-volume on triangulated surfaces, its normalized Ricci flow, and cusp decay checks.

mod cusp;
mod flow;
mod mesh;
mod surface;

pub use cusp::{cusp_decay_report, reference_profiles, CuspProfile, CuspReport, DecayClass, Fit, FLOOR as CUSP_FLOOR, MIN_R2};
pub use flow::{ricci_flow, FlowOptions, FlowRow, FlowTrace, Termination};
pub use mesh::{bolza_mesh, disk_distance, Mesh};
pub use surface::{
    nonuniqueness_witness, random_perturbation, w_along_path, w_conformal_change, w_first_variation, w_segment, DiscreteMetricSurface, Geometry, WChange,
};
