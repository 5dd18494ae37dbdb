//! Graph realization: parameters, communities, block probabilities, degree
//! factors, edges, connectivity repair, features and whole families.

mod degree;
mod edges;
mod family;
mod params;
pub(crate) mod repair;
mod scaling;

pub use degree::{assign_degree_factors, rank_center, rank_sigma};
pub use edges::generate_edges;
pub use family::{
    derive_shifted_family, generate_family, generate_family_with_progress, generate_graph,
    FamilyOutcome, FamilyShift, FAILURE_BUDGET,
};
pub use params::{assign_nodes, sample_graph_params, select_communities};
pub use repair::repair_connectivity;
pub use scaling::{
    compensated_matrix, expected_edges, scale_for_degree_factors, scale_probability_matrix,
    ScaledMatrixDerivation,
};
