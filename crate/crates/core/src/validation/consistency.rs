//! Whether community identities carry over between graphs of a family.

use super::metrics::actual_probability_matrix;
use super::stats::{average_ranks, spearman};
use crate::types::{GraphInstance, Universe};

/// Mean over participating communities of the Spearman correlation between
/// the universe propensity row and the realized block probability row.
/// Needs at least three communities; constant rows are left out.
pub fn structure_consistency(instance: &GraphInstance, universe: &Universe) -> Option<f64> {
    let k = instance.community_count();
    if k < 3 {
        return None;
    }
    let propensity = universe.propensity.submatrix(&instance.communities);
    let actual = actual_probability_matrix(instance);
    let rows: Vec<f64> = (0..k)
        .filter_map(|r| {
            let rho = spearman(propensity.row(r), actual.row(r));
            if rho.is_none() {
                log::debug!("graph {}: row {r} has no rank variance", instance.graph_index);
            }
            rho
        })
        .collect();
    super::stats::mean(&rows)
}

/// Mean degree of each participating community, in local order.
pub fn community_mean_degrees(instance: &GraphInstance) -> Vec<f64> {
    let k = instance.community_count();
    let mut sums = vec![0.0; k];
    let mut sizes = vec![0usize; k];
    for (v, d) in instance.degrees().into_iter().enumerate() {
        let c = instance.node_community[v];
        sums[c] += d as f64;
        sizes[c] += 1;
    }
    sums.iter()
        .zip(&sizes)
        .map(|(s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
        .collect()
}

/// Percentile signature over all `K` universe communities: `(rank - 1) / (k - 1)`
/// of the community mean degree for participating ones, `None` elsewhere.
pub fn percentile_signature(instance: &GraphInstance, universe_size: usize) -> Vec<Option<f64>> {
    let k = instance.community_count();
    let ranks = average_ranks(&community_mean_degrees(instance));
    let mut signature = vec![None; universe_size];
    for (local, &c) in instance.communities.iter().enumerate() {
        signature[c] = Some(if k > 1 { (ranks[local] - 1.0) / (k - 1) as f64 } else { 0.0 });
    }
    signature
}

/// Per graph `(rho_within + rho_cross) / 2`. `rho_within` ranks community
/// mean degrees against the universe degree centers; `rho_cross` is the
/// overlap-weighted mean Spearman correlation of percentile signatures with
/// every other graph sharing at least three communities. Without such a
/// partner the value falls back to `rho_within`.
pub fn degree_consistency(instances: &[GraphInstance], universe: &Universe) -> Vec<Option<f64>> {
    let big_k = universe.config.community_count;
    let signatures: Vec<Vec<Option<f64>>> = instances
        .iter()
        .map(|g| percentile_signature(g, big_k))
        .collect();
    instances
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            if g.community_count() < 2 {
                return None;
            }
            let centers: Vec<f64> = g.communities.iter().map(|&c| universe.degree_centers[c]).collect();
            let within = spearman(&community_mean_degrees(g), &centers);
            let cross = cross_signature_correlation(&signatures, gi);
            match (within, cross) {
                (Some(w), Some(c)) => Some((w + c) / 2.0),
                (Some(w), None) => {
                    log::debug!("graph {}: no cross-graph partner, using within-graph term", g.graph_index);
                    Some(w)
                }
                (None, c) => c,
            }
        })
        .collect()
}

fn cross_signature_correlation(signatures: &[Vec<Option<f64>>], gi: usize) -> Option<f64> {
    let mine = &signatures[gi];
    let (mut weighted, mut weights) = (0.0, 0.0);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (gj, theirs) in signatures.iter().enumerate() {
        if gj == gi {
            continue;
        }
        a.clear();
        b.clear();
        for (x, y) in mine.iter().zip(theirs) {
            if let (Some(x), Some(y)) = (x, y) {
                a.push(*x);
                b.push(*y);
            }
        }
        if a.len() < 3 {
            continue;
        }
        if let Some(rho) = spearman(&a, &b) {
            weighted += a.len() as f64 * rho;
            weights += a.len() as f64;
        }
    }
    (weights > 0.0).then(|| weighted / weights)
}

/// Empirical centroid of each participating community, keyed by universe id.
pub fn community_centroids(instance: &GraphInstance) -> Vec<(usize, Vec<f64>)> {
    let dim = instance.feature_dim;
    let k = instance.community_count();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for v in 0..instance.node_count() {
        let c = instance.node_community[v];
        sizes[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(instance.feature_row(v)) {
            *s += x;
        }
    }
    sums.into_iter()
        .enumerate()
        .filter(|&(c, _)| sizes[c] > 0)
        .map(|(c, s)| {
            let n = sizes[c] as f64;
            (instance.communities[c], s.into_iter().map(|x| x / n).collect())
        })
        .collect()
}

/// Mean over graph pairs of the mean cosine similarity between the centroids
/// of their shared communities. Pairs without a usable shared community and
/// zero-norm centroids are skipped.
pub fn feature_consistency(instances: &[GraphInstance]) -> Option<f64> {
    if instances.len() < 2 {
        return None;
    }
    // Unit centroids per graph, indexed by universe id.
    let units: Vec<std::collections::BTreeMap<usize, Vec<f64>>> = instances
        .iter()
        .map(|g| {
            community_centroids(g)
                .into_iter()
                .filter_map(|(c, mu)| {
                    let norm = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
                    (norm > 0.0).then(|| (c, mu.into_iter().map(|x| x / norm).collect()))
                })
                .collect()
        })
        .collect();
    let (mut total, mut pairs) = (0.0, 0usize);
    for i in 0..units.len() {
        for j in i + 1..units.len() {
            let (mut sum, mut shared) = (0.0, 0usize);
            for (c, a) in &units[i] {
                if let Some(b) = units[j].get(c) {
                    sum += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0);
                    shared += 1;
                }
            }
            if shared > 0 {
                total += sum / shared as f64;
                pairs += 1;
            }
        }
    }
    (pairs > 0).then(|| total / pairs as f64)
}
