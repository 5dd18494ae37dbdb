use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::degree::assign_degree_factors;
use super::edges::generate_edges;
use super::params::{assign_nodes, sample_graph_params, select_communities};
use super::repair::repair_connectivity;
use super::scaling::scale_for_degree_factors;
use crate::error::{invalid, GenError, GraphFailure, Result};
use crate::rng::DeterministicStream;
use crate::types::{FamilyConfig, GraphInstance, Universe};
use crate::universe::sample_node_features;

/// Realizes graph `graph_index` of a family. Every draw comes from the
/// graph's own stream, so the result does not depend on what else runs.
pub fn generate_graph(
    universe: &Universe,
    family: &FamilyConfig,
    graph_index: usize,
) -> Result<GraphInstance> {
    let mut stream = DeterministicStream::for_graph(
        universe.config.seed,
        family.effective_seed(universe),
        graph_index,
    );
    let params = sample_graph_params(&mut stream, family);
    let n = params.node_count;
    let communities =
        select_communities(&mut stream, universe.config.community_count, params.community_count)?;
    let p_sub = universe.propensity.submatrix(&communities);
    let node_community = assign_nodes(&mut stream, n, communities.len())?;
    let centers: Vec<f64> = communities
        .iter()
        .map(|&c| universe.degree_centers[c])
        .collect();
    let theta = assign_degree_factors(
        &mut stream,
        &node_community,
        &centers,
        params.degree_separation,
        params.power_law_exponent,
    )?;

    let (p_star, clip_count, saturation_compensation, saturated_pairs, edges, repair_edge_count) = if n >= 2 {
        let scaled = scale_for_degree_factors(
            &p_sub,
            params.homophily,
            params.avg_degree,
            &theta,
            &node_community,
        )?;
        let edges = generate_edges(&mut stream, &theta, &node_community, &scaled.sampling_matrix());
        let (edges, added) =
            repair_connectivity(&mut stream, edges, &node_community, &scaled.p_star);
        let compensation = [scaled.intra_compensation, scaled.inter_compensation];
        (scaled.p_star, scaled.clip_count, compensation, scaled.saturated_pairs, edges, added)
    } else {
        (crate::types::SquareMatrix::zeros(communities.len()), 0, [1.0, 1.0], 0, Vec::new(), 0)
    };

    let feature_dim = universe.config.feature_dim;
    let mut features = Vec::with_capacity(n * feature_dim);
    for &c in &node_community {
        features.extend(sample_node_features(&mut stream, universe, communities[c])?);
    }

    Ok(GraphInstance {
        graph_index,
        params,
        communities,
        node_community,
        edges,
        theta,
        feature_dim,
        features,
        p_star,
        clip_count,
        saturation_compensation,
        saturated_pairs,
        repair_edge_count,
    })
}

/// Result of generating a whole family. Instances and timings are in index
/// order; failed indices are missing from `instances` and listed in `failures`.
#[derive(Debug, Clone)]
pub struct FamilyOutcome {
    pub instances: Vec<GraphInstance>,
    /// Wall-clock seconds per generated instance, aligned with `instances`.
    pub generation_secs: Vec<f64>,
    pub failures: Vec<GraphFailure>,
}

/// Highest tolerated share of failing graphs.
pub const FAILURE_BUDGET: f64 = 0.01;

pub fn generate_family(universe: &Universe, family: &FamilyConfig) -> Result<FamilyOutcome> {
    generate_family_with_progress(universe, family, &AtomicUsize::new(0))
}

/// Generates on the current rayon pool, bumping `progress` once per finished graph.
pub fn generate_family_with_progress(
    universe: &Universe,
    family: &FamilyConfig,
    progress: &AtomicUsize,
) -> Result<FamilyOutcome> {
    universe.config.validate()?;
    family.validate(universe.config.community_count)?;
    let results: Vec<(usize, Result<GraphInstance>, f64)> = (0..family.graph_count)
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let result = generate_graph(universe, family, i);
            let secs = start.elapsed().as_secs_f64();
            progress.fetch_add(1, Ordering::Relaxed);
            (i, result, secs)
        })
        .collect();

    let mut outcome = FamilyOutcome {
        instances: Vec::with_capacity(results.len()),
        generation_secs: Vec::with_capacity(results.len()),
        failures: Vec::new(),
    };
    for (graph_index, result, secs) in results {
        match result {
            Ok(instance) => {
                outcome.instances.push(instance);
                outcome.generation_secs.push(secs);
            }
            Err(e) => {
                log::warn!("graph {graph_index} failed: {e}");
                outcome.failures.push(GraphFailure {
                    graph_index,
                    message: e.to_string(),
                });
            }
        }
    }
    let failed = outcome.failures.len();
    if failed as f64 > FAILURE_BUDGET * family.graph_count as f64 {
        return Err(GenError::FamilyFailed {
            failed,
            total: family.graph_count,
            failures: outcome.failures,
        });
    }
    Ok(outcome)
}

/// Translations applied by [`derive_shifted_family`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyShift {
    pub homophily: f64,
    pub avg_degree: f64,
    pub node_count: i64,
}

/// Copy of `base` with the homophily, degree and node-count ranges translated.
/// Homophily bounds are clamped to `[0, 1]`; every other field is untouched.
pub fn derive_shifted_family(base: &FamilyConfig, shift: &FamilyShift) -> Result<FamilyConfig> {
    let mut out = base.clone();
    let (h_lo, h_hi) = base.homophily_range;
    out.homophily_range = (
        (h_lo + shift.homophily).clamp(0.0, 1.0),
        (h_hi + shift.homophily).clamp(0.0, 1.0),
    );
    let (d_lo, d_hi) = base.degree_range;
    out.degree_range = (d_lo + shift.avg_degree, d_hi + shift.avg_degree);
    if !(out.degree_range.0 > 0.0) {
        return Err(invalid("degree_range", "shifted average degree must stay positive"));
    }
    let move_nodes = |v: usize| -> Result<usize> {
        usize::try_from(v as i64 + shift.node_count)
            .map_err(|_| invalid("node_range", "shifted node count is negative"))
    };
    out.node_range = (move_nodes(base.node_range.0)?, move_nodes(base.node_range.1)?);
    if out.node_range.0 < base.community_range.1 {
        return Err(invalid(
            "node_range",
            format!(
                "shifted min node count {} is below max community count {}",
                out.node_range.0, base.community_range.1
            ),
        ));
    }
    Ok(out)
}
