//! Metric implementations against independent brute-force references.

use graphfam::rng::DeterministicStream;
use graphfam::tasks::count_triangles;
use graphfam::validation::consistency::{degree_consistency, feature_consistency, structure_consistency};
use graphfam::validation::metrics::{actual_probability_matrix, macro_f1, prob_matrix_deviation};
use graphfam::validation::stats::{correlation_p_value, pearson, spearman};
use graphfam::validation::structure_features;
use graphfam::{build_universe, generate_graph, FamilyConfig, GraphInstance, SquareMatrix, Universe, UniverseConfig};

fn naive_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn random_vector(s: &mut DeterministicStream, len: usize) -> Vec<f64> {
    // One decimal place, so ties are common.
    (0..len).map(|_| (s.uniform() * 50.0).floor() / 10.0).collect()
}

#[test]
fn correlations_match_naive_formulas() {
    let mut s = DeterministicStream::for_universe(2024);
    let mut checked = 0;
    while checked < 100 {
        let len = s.integer_in(3, 50);
        let (x, y) = (random_vector(&mut s, len), random_vector(&mut s, len));
        let (Some(p), Some(r)) = (pearson(&x, &y), spearman(&x, &y)) else { continue };
        assert!((p - naive_pearson(&x, &y)).abs() <= 1e-12, "pearson {x:?} {y:?}");
        let oracle = naive_pearson(&naive_ranks(&x), &naive_ranks(&y));
        assert!((r - oracle).abs() <= 1e-12, "spearman {x:?} {y:?}");
        checked += 1;
    }
}

/// Two-sided Student-t tail by Simpson integration of the density.
fn simpson_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = (r * (df / (1.0 - r * r)).sqrt()).abs();
    let ln_norm = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    let density = |u: f64| (ln_norm - (df + 1.0) / 2.0 * (1.0 + u * u / df).ln()).exp();
    let steps = 200_000;
    let h = t / steps as f64;
    let mut acc = density(0.0) + density(t);
    for i in 1..steps {
        acc += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * acc * h / 3.0
}

#[test]
fn p_values_match_quadrature() {
    let mut s = DeterministicStream::for_universe(7);
    for _ in 0..100 {
        let n = s.integer_in(5, 200);
        let r = s.uniform_in(-0.95, 0.95);
        let p = correlation_p_value(r, n).unwrap();
        assert!((p - simpson_p_value(r, n)).abs() < 1e-10, "r={r} n={n}");
    }
    // scipy.stats.pearsonr-equivalent reference for r = 0.5, N = 100.
    assert!((correlation_p_value(0.5, 100).unwrap() - 1.1805e-7).abs() < 1e-10);
}

fn confusion_f1(truth: &[usize], predicted: &[usize]) -> f64 {
    let mut labels: Vec<usize> = truth.iter().chain(predicted).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let mut total = 0.0;
    for &c in &labels {
        let tp = truth.iter().zip(predicted).filter(|&(&t, &p)| t == c && p == c).count() as f64;
        let predicted_c = predicted.iter().filter(|&&p| p == c).count() as f64;
        let actual_c = truth.iter().filter(|&&t| t == c).count() as f64;
        let precision = if predicted_c > 0.0 { tp / predicted_c } else { 0.0 };
        let recall = if actual_c > 0.0 { tp / actual_c } else { 0.0 };
        total += if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    }
    total / labels.len() as f64
}

#[test]
fn macro_f1_matches_confusion_matrix() {
    let mut s = DeterministicStream::for_universe(11);
    for _ in 0..200 {
        let len = s.integer_in(1, 40);
        let classes = s.integer_in(1, 6);
        let truth: Vec<usize> = (0..len).map(|_| s.index_below(classes)).collect();
        let predicted: Vec<usize> = (0..len).map(|_| s.index_below(classes)).collect();
        assert!((macro_f1(&truth, &predicted) - confusion_f1(&truth, &predicted)).abs() <= 1e-12);
    }
}

fn small_universe() -> Universe {
    build_universe(&UniverseConfig {
        community_count: 12,
        edge_propensity_variance: 0.2,
        seed: 5,
        ..Default::default()
    })
    .unwrap()
}

fn small_graphs(count: usize) -> (Universe, Vec<GraphInstance>) {
    let universe = small_universe();
    let family = FamilyConfig {
        graph_count: count,
        node_range: (8, 30),
        community_range: (3, 5),
        homophily_range: (0.2, 0.8),
        degree_range: (2.0, 6.0),
        seed: Some(99),
        ..Default::default()
    };
    let graphs = (0..count).map(|i| generate_graph(&universe, &family, i).unwrap()).collect();
    (universe, graphs)
}

#[test]
fn triangles_match_triple_enumeration() {
    let (_, graphs) = small_graphs(120);
    for g in &graphs {
        let n = g.node_count();
        let mut adj = vec![vec![false; n]; n];
        for &[u, v] in &g.edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        let mut brute = 0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if adj[a][b] && adj[b][c] && adj[a][c] {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(count_triangles(n, &g.edges), brute);
    }
}

#[test]
fn deviation_matches_pairwise_recount() {
    let (_, graphs) = small_graphs(120);
    for g in &graphs {
        let (n, k) = (g.node_count(), g.community_count());
        let c = &g.node_community;
        let has_edge = |a: usize, b: usize| g.edges.binary_search(&[a.min(b), a.max(b)]).is_ok();
        let mut total = 0.0;
        for r in 0..k {
            for s in 0..k {
                // Ordered pairs of distinct nodes (a in r, b in s).
                let (mut pairs, mut edges) = (0usize, 0usize);
                for a in 0..n {
                    for b in 0..n {
                        if a != b && c[a] == r && c[b] == s {
                            pairs += 1;
                            edges += usize::from(has_edge(a, b));
                        }
                    }
                }
                let actual = if pairs == 0 { 0.0 } else { edges as f64 / pairs as f64 };
                total += (actual - g.p_star.get(r, s)).abs();
            }
        }
        let brute = total / (k * k) as f64;
        assert!((prob_matrix_deviation(g, &g.p_star) - brute).abs() <= 1e-12);
    }
}

#[test]
fn worked_structure_example() {
    // Node 0 with six neighbors, seven nodes at distance two (all behind
    // node 1) and three at distance three (behind node 7). Communities are
    // the 1-based example labels minus one.
    let mut comm = vec![2];
    comm.extend([0, 0, 1, 3, 3, 3]);
    comm.extend([1, 1, 2, 4, 4, 4, 4]);
    comm.extend([0, 3, 3]);
    let mut edges = Vec::new();
    for a in 1..=6 {
        edges.push([0, a]);
    }
    for b in 7..=13 {
        edges.push([1, b]);
    }
    for c in 14..=16 {
        edges.push([7, c]);
    }
    let n = comm.len();
    let mut adj = vec![Vec::new(); n];
    for &[u, v] in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let f = structure_features(&adj, &comm, 5);
    let expected = [2., 1., 0., 3., 0., 0., 2., 1., 0., 4., 1., 0., 0., 2., 0.];
    assert_eq!(&f[..15], &expected);
}

#[test]
fn structure_consistency_matches_rowwise_spearman() {
    let (universe, graphs) = small_graphs(60);
    for g in graphs.iter().filter(|g| g.community_count() >= 3) {
        let p = universe.propensity.submatrix(&g.communities);
        let a = actual_probability_matrix(g);
        let rows: Vec<f64> = (0..g.community_count())
            .filter_map(|r| {
                let (x, y) = (p.row(r), a.row(r));
                let (rx, ry) = (naive_ranks(x), naive_ranks(y));
                let r = naive_pearson(&rx, &ry);
                r.is_finite().then_some(r)
            })
            .collect();
        let expected = rows.iter().sum::<f64>() / rows.len() as f64;
        let got = structure_consistency(g, &universe);
        if rows.is_empty() {
            assert_eq!(got, None);
        } else {
            assert!((got.unwrap() - expected).abs() <= 1e-12);
        }
    }
}

#[test]
fn structure_consistency_survives_relabeling() {
    let (universe, graphs) = small_graphs(30);
    let k = universe.config.community_count;
    let perm: Vec<usize> = (0..k).map(|c| (c * 5 + 2) % k).collect();
    let mut relabeled = universe.clone();
    relabeled.propensity = SquareMatrix::from_fn(k, |r, s| {
        let inv = |x: usize| perm.iter().position(|&p| p == x).unwrap();
        universe.propensity.get(inv(r), inv(s))
    });
    for g in graphs.iter().filter(|g| g.community_count() >= 3) {
        let mut order: Vec<usize> = (0..g.community_count()).collect();
        order.sort_by_key(|&i| perm[g.communities[i]]);
        let mut h = g.clone();
        h.communities = order.iter().map(|&i| perm[g.communities[i]]).collect();
        h.node_community = g
            .node_community
            .iter()
            .map(|&c| order.iter().position(|&i| i == c).unwrap())
            .collect();
        let (a, b) = (structure_consistency(g, &universe), structure_consistency(&h, &relabeled));
        match (a, b) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12),
            (a, b) => assert_eq!(a, b),
        }
    }
}

#[test]
fn feature_consistency_is_rotation_invariant() {
    let (_, graphs) = small_graphs(12);
    let dim = graphs[0].feature_dim;
    // Orthonormal basis by Gram-Schmidt on random vectors.
    let mut s = DeterministicStream::for_universe(3);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| s.standard_normal()).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    let rotated: Vec<GraphInstance> = graphs
        .iter()
        .map(|g| {
            let mut h = g.clone();
            for v in 0..g.node_count() {
                let row = g.feature_row(v);
                for (i, b) in basis.iter().enumerate() {
                    h.features[v * dim + i] = b.iter().zip(row).map(|(x, y)| x * y).sum();
                }
            }
            h
        })
        .collect();
    let (a, b) = (feature_consistency(&graphs).unwrap(), feature_consistency(&rotated).unwrap());
    assert!((a - b).abs() < 1e-12);
    assert!((-1.0..=1.0).contains(&a));
}

#[test]
fn degree_consistency_fallback_and_range() {
    let (universe, graphs) = small_graphs(20);
    let values = degree_consistency(&graphs, &universe);
    assert_eq!(values.len(), graphs.len());
    for v in values.iter().flatten() {
        assert!((-1.0..=1.0).contains(v));
    }
    // A lone graph has no partner, so only the within-graph term remains.
    let lone = degree_consistency(&graphs[..1], &universe);
    let g = &graphs[0];
    let centers: Vec<f64> = g.communities.iter().map(|&c| universe.degree_centers[c]).collect();
    let within = spearman(&graphfam::validation::consistency::community_mean_degrees(g), &centers);
    assert_eq!(lone[0], within);
}
