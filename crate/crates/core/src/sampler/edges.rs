//! Bernoulli edge sampling with pair probability
//! `min(1, theta_i * theta_j * P*[c(i), c(j)])`.
//!
//! Pairs are visited block by block. Inside a block both node lists are
//! sorted by decreasing `theta`, so the probability of the current pair bounds
//! every later pair on the same row. Geometric skips under that bound plus a
//! thinning step give exact independent Bernoulli draws in time linear in the
//! number of nodes and edges.

use crate::rng::DeterministicStream;
use crate::types::SquareMatrix;

pub fn generate_edges(
    stream: &mut DeterministicStream,
    theta: &[f64],
    node_community: &[usize],
    p_star: &SquareMatrix,
) -> Vec<[usize; 2]> {
    let k = p_star.dim();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (v, &c) in node_community.iter().enumerate() {
        members[c].push(v);
    }
    for list in &mut members {
        list.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]).then(a.cmp(&b)));
    }

    let mut edges = Vec::new();
    for r in 0..k {
        for s in r..k {
            let p = p_star.get(r, s);
            if p <= 0.0 {
                continue;
            }
            let (rows, cols) = (&members[r], &members[s]);
            for (a, &u) in rows.iter().enumerate() {
                let start = if r == s { a + 1 } else { 0 };
                sample_row(stream, theta[u] * p, u, &cols[start..], theta, &mut edges);
            }
        }
    }
    for e in &mut edges {
        if e[0] > e[1] {
            e.swap(0, 1);
        }
    }
    edges.sort_unstable();
    edges
}

/// Samples edges from `u` to each of `cols` (non-increasing `theta`) with
/// probability `min(1, weight * theta[v])`.
fn sample_row(
    stream: &mut DeterministicStream,
    weight: f64,
    u: usize,
    cols: &[usize],
    theta: &[f64],
    edges: &mut Vec<[usize; 2]>,
) {
    let mut j = 0;
    let Some(&first) = cols.first() else { return };
    let mut bound = (weight * theta[first]).min(1.0);
    while j < cols.len() && bound > 0.0 {
        if bound < 1.0 {
            let skip = (1.0 - stream.uniform()).ln() / (1.0 - bound).ln();
            if skip >= (cols.len() - j) as f64 {
                return;
            }
            j += skip as usize;
        }
        let v = cols[j];
        let q = (weight * theta[v]).min(1.0);
        if stream.uniform() * bound < q {
            edges.push([u, v]);
        }
        bound = q;
        j += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_gives_no_edges() {
        let mut s = DeterministicStream::for_universe(1);
        let edges = generate_edges(&mut s, &[1.0; 10], &[0; 10], &SquareMatrix::zeros(1));
        assert!(edges.is_empty());
    }

    #[test]
    fn certain_probability_gives_complete_graph() {
        let mut s = DeterministicStream::for_universe(1);
        let edges = generate_edges(&mut s, &[1.0; 6], &[0, 1, 0, 1, 0, 1], &SquareMatrix::filled(2, 1.0));
        assert_eq!(edges.len(), 15);
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
        assert!(edges.iter().all(|&[u, v]| u < v));
    }

    #[test]
    fn erdos_renyi_edge_count() {
        let n = 200;
        let expected = 0.05 * (n * (n - 1) / 2) as f64;
        let reps = 200;
        let mut counts = Vec::new();
        for seed in 0..reps {
            let mut s = DeterministicStream::for_universe(seed);
            let edges =
                generate_edges(&mut s, &vec![1.0; n], &vec![0; n], &SquareMatrix::filled(1, 0.05));
            counts.push(edges.len() as f64);
        }
        // 3 sigma of a Binomial(19900, 0.05) count is 92.
        let outside = counts.iter().filter(|&&c| (c - expected).abs() >= 92.0).count();
        assert!(outside <= 4, "{outside} of {reps} counts beyond 3 sigma");
        let mean = counts.iter().sum::<f64>() / reps as f64;
        assert!((mean - expected).abs() < 3.0 * 30.7 / (reps as f64).sqrt());
    }

    #[test]
    fn per_pair_frequencies_match_clipped_probabilities() {
        // Heterogeneous factors with some pairs above probability 1.
        let theta = [3.0, 1.5, 1.0, 0.5, 0.25, 2.0];
        let comm = [0, 0, 1, 1, 0, 1];
        let p = SquareMatrix::from_fn(2, |r, s| if r == s { 0.3 } else { 0.15 });
        let n = theta.len();
        let reps = 40_000;
        let mut hits = vec![0usize; n * n];
        for seed in 0..reps {
            let mut s = DeterministicStream::for_graph(5, 5, seed);
            for [u, v] in generate_edges(&mut s, &theta, &comm, &p) {
                hits[u * n + v] += 1;
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                let q = (theta[u] * theta[v] * p.get(comm[u], comm[v])).min(1.0);
                let freq = hits[u * n + v] as f64 / reps as f64;
                let sd = (q * (1.0 - q) / reps as f64).sqrt().max(1e-9);
                assert!((freq - q).abs() <= 4.5 * sd, "pair ({u},{v}) freq {freq} vs {q}");
            }
        }
    }
}
