//! Per-graph structural metrics.

use crate::sampler::repair::{block_densities, block_edge_counts};
use crate::types::{GraphInstance, SquareMatrix};

/// Fraction of edges joining two nodes of the same community; `None` without edges.
pub fn graph_homophily(instance: &GraphInstance) -> Option<f64> {
    if instance.edges.is_empty() {
        return None;
    }
    let c = &instance.node_community;
    let intra = instance.edges.iter().filter(|&&[u, v]| c[u] == c[v]).count();
    Some(intra as f64 / instance.edges.len() as f64)
}

pub fn average_degree(instance: &GraphInstance) -> f64 {
    match instance.node_count() {
        0 => 0.0,
        n => 2.0 * instance.edges.len() as f64 / n as f64,
    }
}

/// Nearest-rank 99th percentile degree over the mean degree. `None` when
/// the graph has no nodes or no edges.
pub fn degree_tail_ratio_99(instance: &GraphInstance) -> Option<f64> {
    tail_ratio_99(&instance.degrees())
}

pub fn tail_ratio_99(degrees: &[usize]) -> Option<f64> {
    let n = degrees.len();
    let mean = degrees.iter().sum::<usize>() as f64 / n.max(1) as f64;
    if n == 0 || mean == 0.0 {
        return None;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    let rank = ((0.99 * n as f64).ceil() as usize).clamp(1, n);
    Some(sorted[rank - 1] as f64 / mean)
}

/// Realized block probabilities: ordered-pair edge counts over `n_r (n_r - 1)`
/// on the diagonal and `n_r n_s` elsewhere.
pub fn actual_probability_matrix(instance: &GraphInstance) -> SquareMatrix {
    let counts = block_edge_counts(&instance.edges, &instance.node_community, instance.community_count());
    block_densities(&counts, &instance.community_sizes())
}

/// Mean absolute cell difference between the realized block probabilities
/// and `target`.
pub fn prob_matrix_deviation(instance: &GraphInstance, target: &SquareMatrix) -> f64 {
    let actual = actual_probability_matrix(instance);
    let k = actual.dim();
    assert_eq!(k, target.dim(), "target must match the participating communities");
    if k == 0 {
        return 0.0;
    }
    let total: f64 = actual
        .values()
        .iter()
        .zip(target.values())
        .map(|(a, t)| (a - t).abs())
        .sum();
    total / (k * k) as f64
}

/// Macro-averaged F1 over every label that occurs in `truth` or `predicted`.
pub fn macro_f1(truth: &[usize], predicted: &[usize]) -> f64 {
    assert_eq!(truth.len(), predicted.len());
    let labels = truth.iter().chain(predicted).copied().max().map_or(0, |m| m + 1);
    let (mut tp, mut fp, mut fne) = (vec![0usize; labels], vec![0usize; labels], vec![0usize; labels]);
    for (&t, &p) in truth.iter().zip(predicted) {
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fne[t] += 1;
        }
    }
    let mut sum = 0.0;
    let mut present = 0;
    for c in 0..labels {
        let denom = 2 * tp[c] + fp[c] + fne[c];
        if denom == 0 {
            continue;
        }
        present += 1;
        sum += 2.0 * tp[c] as f64 / denom as f64;
    }
    if present == 0 {
        1.0
    } else {
        sum / present as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::GraphParams;

    pub(crate) fn toy(node_community: Vec<usize>, edges: Vec<[usize; 2]>) -> GraphInstance {
        let n = node_community.len();
        let k = node_community.iter().max().map_or(0, |m| m + 1);
        GraphInstance {
            graph_index: 0,
            params: GraphParams {
                node_count: n,
                community_count: k,
                homophily: 0.5,
                avg_degree: 1.0,
                degree_separation: 0.5,
                power_law_exponent: 2.5,
            },
            communities: (0..k).collect(),
            node_community,
            edges,
            theta: vec![1.0; n],
            feature_dim: 0,
            features: vec![],
            p_star: SquareMatrix::zeros(k),
            clip_count: 0,
            saturation_compensation: [1.0, 1.0],
            saturated_pairs: 0,
            repair_edge_count: 0,
        }
    }

    #[test]
    fn homophily_examples() {
        let g = toy(vec![0, 0, 1, 1], vec![[0, 1], [0, 2], [2, 3]]);
        assert!((graph_homophily(&g).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let all_intra = toy(vec![0, 0, 1, 1], vec![[0, 1], [2, 3]]);
        assert_eq!(graph_homophily(&all_intra), Some(1.0));
        let bipartite = toy(vec![0, 0, 1, 1], vec![[0, 2], [1, 3], [0, 3]]);
        assert_eq!(graph_homophily(&bipartite), Some(0.0));
        assert_eq!(graph_homophily(&toy(vec![0, 0], vec![])), None);
    }

    #[test]
    fn tail_ratio_examples() {
        let degrees = [1, 1, 1, 1, 1, 1, 1, 1, 1, 11];
        assert_eq!(tail_ratio_99(&degrees), Some(5.5));
        assert_eq!(tail_ratio_99(&[3; 8]), Some(1.0));
        assert_eq!(tail_ratio_99(&[0; 4]), None);
    }

    #[test]
    fn deviation_of_empty_graph_is_mean_target() {
        let g = toy(vec![0, 0, 1, 1, 2], vec![]);
        let target = SquareMatrix::from_fn(3, |r, s| 0.1 * (r + s) as f64);
        let mean = target.values().iter().sum::<f64>() / 9.0;
        assert!((prob_matrix_deviation(&g, &target) - mean).abs() < 1e-15);
    }

    #[test]
    fn deviation_zero_at_expectation() {
        // Complete graph on two communities of two matches an all-ones target.
        let edges = vec![[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
        let g = toy(vec![0, 0, 1, 1], edges);
        assert_eq!(prob_matrix_deviation(&g, &SquareMatrix::filled(2, 1.0)), 0.0);
    }

    #[test]
    fn f1_by_hand() {
        // Class 0: tp 2, fp 1, fn 0 -> 0.8. Class 1: tp 1, fp 0, fn 1 -> 2/3.
        let f1 = macro_f1(&[0, 0, 1, 1], &[0, 0, 0, 1]);
        assert!((f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        // A predicted-only label contributes an F1 of 0.
        let f1 = macro_f1(&[0, 0], &[0, 2]);
        assert!((f1 - (2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(macro_f1(&[1, 2, 3], &[1, 2, 3]), 1.0);
    }
}
