//! Greedy connectivity repair.
//!
//! While the graph has more than one component, the smallest component is
//! joined to the largest by one edge. The community pair for that edge is the
//! one whose realized block probability falls furthest below the target after
//! both are brought to the same total mass; ties go to the lexicographically
//! smallest pair. Endpoints are uniform within the chosen communities.
//!
//! Components are tracked incrementally: joining two components never changes
//! any other, so the result equals recomputing them after every edge.

use crate::rng::DeterministicStream;
use crate::types::{components, SquareMatrix};

/// Returns the repaired, sorted edge list and the number of edges added.
pub fn repair_connectivity(
    stream: &mut DeterministicStream,
    edges: Vec<[usize; 2]>,
    node_community: &[usize],
    target: &SquareMatrix,
) -> (Vec<[usize; 2]>, usize) {
    let n = node_community.len();
    let k = target.dim();
    let mut comps = components(n, &edges);
    if comps.len() <= 1 {
        return (edges, 0);
    }

    let mut sizes = vec![0usize; k];
    for &c in node_community {
        sizes[c] += 1;
    }
    let mut counts = block_edge_counts(&edges, node_community, k);
    let target_mass: f64 = target.values().iter().sum();

    let mut edges = edges;
    let mut added = 0;
    // Main component: largest, ties to the one holding the smallest node id.
    let main_pos = (0..comps.len())
        .max_by(|&a, &b| comps[a].len().cmp(&comps[b].len()).then(b.cmp(&a)))
        .expect("at least two components");
    let main = comps.swap_remove(main_pos);
    let mut main_by_comm: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &v in &main {
        main_by_comm[node_community[v]].push(v);
    }
    // Remaining components in ascending (size, smallest node) order.
    comps.sort_by(|a, b| a.len().cmp(&b.len()).then(a[0].cmp(&b[0])));

    for small in comps {
        let mut small_by_comm: Vec<Vec<usize>> = vec![Vec::new(); k];
        for &v in &small {
            small_by_comm[node_community[v]].push(v);
        }
        let actual = normalized_actual(&counts, &sizes, target_mass);
        let mut best: Option<(f64, usize, usize)> = None;
        for r in (0..k).filter(|&r| !small_by_comm[r].is_empty()) {
            for s in (0..k).filter(|&s| !main_by_comm[s].is_empty()) {
                let dev = actual.get(r, s) - target.get(r, s);
                if best.is_none_or(|(b, _, _)| dev < b) {
                    best = Some((dev, r, s));
                }
            }
        }
        let (_, r, s) = best.expect("both components contain nodes");
        let u = small_by_comm[r][stream.index_below(small_by_comm[r].len())];
        let v = main_by_comm[s][stream.index_below(main_by_comm[s].len())];
        edges.push([u.min(v), u.max(v)]);
        added += 1;
        bump(&mut counts, r, s);
        for (c, nodes) in small_by_comm.into_iter().enumerate() {
            main_by_comm[c].extend(nodes);
        }
    }
    edges.sort_unstable();
    (edges, added)
}

/// Ordered-pair edge counts: intra-community edges count twice on the diagonal.
pub(crate) fn block_edge_counts(
    edges: &[[usize; 2]],
    node_community: &[usize],
    k: usize,
) -> SquareMatrix {
    let mut counts = SquareMatrix::zeros(k);
    for &[u, v] in edges {
        bump(&mut counts, node_community[u], node_community[v]);
    }
    counts
}

fn bump(counts: &mut SquareMatrix, r: usize, s: usize) {
    if r == s {
        counts.set(r, r, counts.get(r, r) + 2.0);
    } else {
        counts.set(r, s, counts.get(r, s) + 1.0);
        counts.set(s, r, counts.get(s, r) + 1.0);
    }
}

/// Block edge densities with `n_r (n_r - 1)` diagonal and `n_r n_s`
/// off-diagonal denominators; cells with no possible pairs are 0.
pub(crate) fn block_densities(counts: &SquareMatrix, sizes: &[usize]) -> SquareMatrix {
    SquareMatrix::from_fn(counts.dim(), |r, s| {
        let pairs = if r == s {
            sizes[r] * sizes[r].saturating_sub(1)
        } else {
            sizes[r] * sizes[s]
        };
        if pairs == 0 {
            0.0
        } else {
            counts.get(r, s) / pairs as f64
        }
    })
}

fn normalized_actual(counts: &SquareMatrix, sizes: &[usize], target_mass: f64) -> SquareMatrix {
    let mut density = block_densities(counts, sizes);
    let mass: f64 = density.values().iter().sum();
    if mass > 0.0 {
        let scale = target_mass / mass;
        density = SquareMatrix::from_fn(density.dim(), |r, s| density.get(r, s) * scale);
    }
    density
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::component_count;

    #[test]
    fn connected_graph_is_untouched() {
        let mut s = DeterministicStream::for_universe(1);
        let edges = vec![[0, 1], [1, 2]];
        let (out, added) =
            repair_connectivity(&mut s, edges.clone(), &[0, 0, 1], &SquareMatrix::filled(2, 0.5));
        assert_eq!(out, edges);
        assert_eq!(added, 0);
    }

    #[test]
    fn two_singletons_get_joined() {
        let mut s = DeterministicStream::for_universe(1);
        let (out, added) = repair_connectivity(&mut s, vec![], &[0, 0], &SquareMatrix::filled(1, 0.5));
        assert_eq!(out, vec![[0, 1]]);
        assert_eq!(added, 1);
    }

    #[test]
    fn three_components_need_two_edges() {
        let mut s = DeterministicStream::for_universe(1);
        let edges = vec![[0, 1], [2, 3], [3, 4], [5, 6]];
        let comm = [0, 1, 0, 1, 0, 1, 0];
        let (out, added) = repair_connectivity(&mut s, edges.clone(), &comm, &SquareMatrix::filled(2, 0.2));
        assert_eq!(added, 2);
        assert_eq!(component_count(7, &out), 1);
        assert!(edges.iter().all(|e| out.contains(e)));
    }

    #[test]
    fn prefers_most_under_connected_pair() {
        // Rescaled realized cross density (0.2) sits far below its target
        // (0.9) while the community-0 diagonal is above target, so the
        // isolated node 4 (community 0) must link to a community-1 node.
        let mut s = DeterministicStream::for_universe(3);
        let comm = [0, 0, 1, 1, 0];
        let edges = vec![[0, 1], [0, 2], [2, 3]];
        let target = SquareMatrix::from_fn(2, |r, t| if r == t { 0.1 } else { 0.9 });
        let (out, added) = repair_connectivity(&mut s, edges, &comm, &target);
        assert_eq!(added, 1);
        let new: Vec<_> = out.iter().filter(|e| e[1] == 4 || e[0] == 4).collect();
        assert_eq!(new.len(), 1);
        let other = if new[0][0] == 4 { new[0][1] } else { new[0][0] };
        assert_eq!(comm[other], 1);
    }
}
