//! How well node-level predictors recover community labels within one graph.

use serde::{Deserialize, Serialize};

use super::forest::{ForestConfig, RandomForest, Samples};
use super::metrics::macro_f1;
use crate::rng::DeterministicStream;
use crate::types::GraphInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Feature,
    Degree,
    Structure,
}

impl Signal {
    pub const ALL: [Signal; 3] = [Signal::Feature, Signal::Degree, Signal::Structure];
}

pub const TEST_FRACTION: f64 = 0.3;

/// Counts of neighbors per community at exact BFS distances 1, 2 and 3:
/// row `v` is `[n_v(1) | n_v(2) | n_v(3)]`, each block of length `k`.
pub fn structure_features(adjacency: &[Vec<usize>], node_community: &[usize], k: usize) -> Vec<f64> {
    let n = adjacency.len();
    let width = 3 * k;
    let mut out = vec![0.0; n * width];
    let mut seen = vec![usize::MAX; n];
    let mut frontier = Vec::new();
    let mut next = Vec::new();
    for v in 0..n {
        seen[v] = v;
        frontier.clear();
        frontier.push(v);
        for depth in 0..3 {
            next.clear();
            for &u in &frontier {
                for &w in &adjacency[u] {
                    if seen[w] != v {
                        seen[w] = v;
                        next.push(w);
                        out[v * width + depth * k + node_community[w]] += 1.0;
                    }
                }
            }
            std::mem::swap(&mut frontier, &mut next);
        }
    }
    out
}

/// Per-class 70/30 split: each class sends `round(0.3 n_c)` members, clamped
/// to `[1, n_c - 1]`, to the test side. Every class needs two members.
pub fn stratified_split(
    labels: &[usize],
    test_fraction: f64,
    stream: &mut DeterministicStream,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return None;
        }
        stream.shuffle(&mut members);
        let m = members.len();
        let cut = ((m as f64 * test_fraction).round() as usize).clamp(1, m - 1);
        test.extend_from_slice(&members[..cut]);
        train.extend_from_slice(&members[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Some((train, test))
}

/// Predictor matrix for a signal: `(row-major values, dim)`.
pub fn signal_predictors(instance: &GraphInstance, signal: Signal) -> (Vec<f64>, usize) {
    match signal {
        Signal::Feature => (instance.features.clone(), instance.feature_dim),
        Signal::Degree => (instance.degrees().into_iter().map(|d| d as f64).collect(), 1),
        Signal::Structure => {
            let k = instance.community_count();
            let x = structure_features(&instance.adjacency(), &instance.node_community, k);
            (x, 3 * k)
        }
    }
}

/// Macro-F1 of a forest trained on a stratified split of the graph's nodes.
/// `None` if some community has fewer than two nodes; a single community
/// scores 1.
pub fn signal_strength(
    instance: &GraphInstance,
    signal: Signal,
    forest: &ForestConfig,
    stream: &mut DeterministicStream,
) -> Option<f64> {
    if instance.community_sizes().iter().any(|&s| s < 2) {
        return None;
    }
    if instance.community_count() <= 1 {
        log::warn!("graph {}: single community, {signal:?} signal is trivially 1", instance.graph_index);
        return Some(1.0);
    }
    let (x, dim) = signal_predictors(instance, signal);
    if dim == 0 {
        return None;
    }
    let labels = &instance.node_community;
    let (train, test) = stratified_split(labels, TEST_FRACTION, stream)?;
    let pick = |rows: &[usize]| -> Vec<f64> {
        rows.iter().flat_map(|&i| x[i * dim..(i + 1) * dim].iter().copied()).collect()
    };
    let train_x = pick(&train);
    let train_y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let model = RandomForest::fit(
        &Samples {
            x: &train_x,
            dim,
            y: &train_y,
            classes: instance.community_count(),
        },
        forest,
        stream,
    );
    let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
    let predicted: Vec<usize> = test.iter().map(|&i| model.predict(&x[i * dim..(i + 1) * dim])).collect();
    Some(macro_f1(&truth, &predicted))
}
