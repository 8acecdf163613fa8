//! Fuchsian groups, Poincaré series and the inner product on `RQ`.

mod group;
mod poincare;
mod quadrature;
mod rq;
mod defs;

pub use group::{disk_to_klein, klein_to_disk, octagon_vertex_radius, FuchsianGroup, FundamentalDomain, SidePairing};
pub use poincare::{monomial_seeds, poincare_series, AutomorphyReport, QuadDifferential, SeriesTerms};
pub use quadrature::{domain_nodes, integrate, QuadNode, QuadratureRule};
pub use rq::{gram_matrix, rq_inner_product, RqVector};
pub use defs::{GroupSpec, SeedSpec};
