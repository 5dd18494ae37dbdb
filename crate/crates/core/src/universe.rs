//! Universe construction.
//!
//! Draw order from the universe stream is fixed: propensity perturbations for
//! the upper triangle (diagonal included) in row-major order, then the degree
//! centers, then the centroid coordinates row by row. Anything added later
//! must come from a separately derived stream.

use crate::error::{GenError, Result};
use crate::rng::DeterministicStream;
use crate::types::{SquareMatrix, Universe, UniverseConfig};

pub fn build_universe(config: &UniverseConfig) -> Result<Universe> {
    config.validate()?;
    let k = config.community_count;
    let mut stream = DeterministicStream::for_universe(config.seed);

    let perturbation_sd = 2.0 * config.edge_propensity_variance;
    let mut propensity = SquareMatrix::zeros(k);
    for r in 0..k {
        for s in r..k {
            let xi = perturbation_sd * stream.standard_normal();
            let value = (1.0 + xi).clamp(0.0, 2.0);
            propensity.set(r, s, value);
            propensity.set(s, r, value);
        }
    }

    let degree_centers = (0..k).map(|_| stream.uniform_in(-1.0, 1.0)).collect();

    let center_sd = config.center_variance.sqrt();
    let centroids = (0..k)
        .map(|_| {
            (0..config.feature_dim)
                .map(|_| center_sd * stream.standard_normal())
                .collect()
        })
        .collect();

    Ok(Universe {
        config: config.clone(),
        propensity,
        degree_centers,
        centroids,
    })
}

/// One feature vector: the community centroid plus isotropic noise of
/// variance `cluster_variance`.
pub fn sample_node_features(
    stream: &mut DeterministicStream,
    universe: &Universe,
    community_id: usize,
) -> Result<Vec<f64>> {
    let centroid = universe.centroids.get(community_id).ok_or_else(|| {
        GenError::InvalidArgument(format!(
            "community id {community_id} outside universe of {}",
            universe.config.community_count
        ))
    })?;
    let sd = universe.config.cluster_variance.sqrt();
    Ok(centroid
        .iter()
        .map(|&mu| mu + sd * stream.standard_normal())
        .collect())
}
