//! Deterministic generator for families of community-structured random graphs.
//!
//! A [`Universe`] fixes `K` persistent communities (a propensity matrix,
//! per-community degree centers and feature centroids). A [`FamilyConfig`]
//! gives ranges for per-graph parameters, and every graph of the family is a
//! degree-corrected block model draw whose homophily, average degree, degree
//! coupling and feature noise follow those ranges.
//!
//! ```
//! use graphfam::{build_universe, generate_graph, FamilyConfig, UniverseConfig};
//!
//! let universe = build_universe(&UniverseConfig::default()).unwrap();
//! let graph = generate_graph(&universe, &FamilyConfig::default(), 0).unwrap();
//! assert!(graph.is_connected());
//! ```

pub mod bench;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod rng;
pub mod sampler;
pub mod samplers;
pub mod tasks;
pub mod types;
pub mod universe;
pub mod validation;

pub use error::{GenError, GraphFailure};
pub use rng::{DeterministicStream, RNG_ALGORITHM};
pub use sampler::{derive_shifted_family, generate_family, generate_graph, FamilyOutcome, FamilyShift};
pub use types::{FamilyConfig, GraphInstance, GraphParams, SquareMatrix, Universe, UniverseConfig};
pub use universe::build_universe;
