use crate::error::{GenError, Result};
use crate::rng::DeterministicStream;
use crate::types::{FamilyConfig, GraphParams};

/// Draws `(n, k, h, d, rho, alpha)` uniformly from the family ranges, in that order.
///
/// `k` is capped at `n`; validated families guarantee `n_min >= k_max`, so the
/// cap only matters for hand-built configs.
pub fn sample_graph_params(
    stream: &mut DeterministicStream,
    family: &FamilyConfig,
) -> GraphParams {
    let node_count = stream.integer_in(family.node_range.0, family.node_range.1);
    let k_hi = family.community_range.1.min(node_count);
    let k_lo = family.community_range.0.min(k_hi);
    let community_count = stream.integer_in(k_lo, k_hi);
    let mut draw = |(lo, hi): (f64, f64)| stream.uniform_in(lo, hi);
    GraphParams {
        node_count,
        community_count,
        homophily: draw(family.homophily_range),
        avg_degree: draw(family.degree_range),
        degree_separation: draw(family.degree_separation_range),
        power_law_exponent: draw(family.power_law_range),
    }
}

/// Uniform random `k`-subset of `0..universe_size`, sorted ascending.
pub fn select_communities(
    stream: &mut DeterministicStream,
    universe_size: usize,
    k: usize,
) -> Result<Vec<usize>> {
    if k > universe_size {
        return Err(GenError::InvalidArgument(format!(
            "cannot select {k} communities from {universe_size}"
        )));
    }
    let mut ids: Vec<usize> = (0..universe_size).collect();
    for i in 0..k {
        let j = i + stream.index_below(universe_size - i);
        ids.swap(i, j);
    }
    ids.truncate(k);
    ids.sort_unstable();
    Ok(ids)
}

/// Balanced assignment: every community gets `n / k` nodes and `n % k`
/// randomly chosen communities get one extra; node order is then shuffled.
pub fn assign_nodes(stream: &mut DeterministicStream, n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || n < k {
        return Err(GenError::InvalidArgument(format!(
            "cannot spread {n} nodes over {k} communities"
        )));
    }
    let extra = select_communities(stream, k, n % k)?;
    let mut labels = Vec::with_capacity(n);
    for c in 0..k {
        labels.extend(std::iter::repeat_n(c, n / k));
    }
    labels.extend(extra);
    stream.shuffle(&mut labels);
    Ok(labels)
}
