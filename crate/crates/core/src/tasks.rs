//! Learning-task labels and dataset splits.

use serde::{Deserialize, Serialize};

use crate::error::{GenError, Result};
use crate::rng::DeterministicStream;
use crate::types::GraphInstance;

/// Universe community id of every node.
pub fn community_labels(instance: &GraphInstance) -> Vec<usize> {
    instance
        .node_community
        .iter()
        .map(|&c| instance.communities[c])
        .collect()
}

/// Exact triangle count: for each edge `(u, v)` with `u < v`, count common
/// neighbors `w > v` by merging sorted adjacency lists.
pub fn triangle_count(instance: &GraphInstance) -> u64 {
    count_triangles(instance.node_count(), &instance.edges)
}

pub fn count_triangles(n: usize, edges: &[[usize; 2]]) -> u64 {
    let adj = crate::types::adjacency(n, edges);
    let mut total = 0;
    for &[u, v] in edges {
        let (a, b) = (&adj[u], &adj[v]);
        let (mut i, mut j) = (a.partition_point(|&x| x <= v), b.partition_point(|&x| x <= v));
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    total += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    total
}

/// Train / validation / test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.7,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|f| !(*f > 0.0)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(GenError::InvalidArgument(format!(
                "split fractions must be positive and sum to 1, got {all:?}"
            )));
        }
        Ok(())
    }

    /// Cut points from rounded cumulative fractions.
    fn cuts(&self, count: usize) -> (usize, usize) {
        let first = (count as f64 * self.train).round() as usize;
        let second = (count as f64 * (self.train + self.val)).round() as usize;
        (first.min(count), second.min(count))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitLevel {
    /// Indices are graph indices.
    Graph,
    /// Indices are node indices of a single graph.
    Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub level: SplitLevel,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn split_stream(seed: u64, level: SplitLevel) -> DeterministicStream {
    DeterministicStream::from_words(crate::rng::Domain::Splits, &[seed, level as u64])
}

/// Random permutation of `0..count` cut at the rounded cumulative fractions.
pub fn make_splits(seed: u64, count: usize, fractions: SplitFractions) -> Result<Splits> {
    fractions.validate()?;
    if count < 3 {
        return Err(GenError::InvalidArgument(format!(
            "need at least 3 items for three non-empty splits, got {count}"
        )));
    }
    let mut order: Vec<usize> = (0..count).collect();
    split_stream(seed, SplitLevel::Graph).shuffle(&mut order);
    let (a, b) = fractions.cuts(count);
    let sorted = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    Ok(Splits {
        level: SplitLevel::Graph,
        train: sorted(&order[..a]),
        val: sorted(&order[a..b]),
        test: sorted(&order[b..]),
    })
}

/// Node-level splits for a single graph, stratified by community so that
/// every community with at least three nodes shows up in each split.
pub fn make_node_splits(
    seed: u64,
    node_community: &[usize],
    fractions: SplitFractions,
) -> Result<Splits> {
    fractions.validate()?;
    if node_community.len() < 3 {
        return Err(GenError::InvalidArgument(
            "need at least 3 nodes for three non-empty splits".into(),
        ));
    }
    let k = node_community.iter().copied().max().map_or(0, |m| m + 1);
    let mut stream = split_stream(seed, SplitLevel::Node);
    let mut splits = Splits {
        level: SplitLevel::Node,
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for c in 0..k {
        let mut members: Vec<usize> = (0..node_community.len())
            .filter(|&v| node_community[v] == c)
            .collect();
        stream.shuffle(&mut members);
        let m = members.len();
        let (mut a, mut b) = fractions.cuts(m);
        if m >= 3 {
            a = a.clamp(1, m - 2);
            b = b.clamp(a + 1, m - 1);
        }
        splits.train.extend_from_slice(&members[..a]);
        splits.val.extend_from_slice(&members[a..b]);
        splits.test.extend_from_slice(&members[b..]);
    }
    splits.train.sort_unstable();
    splits.val.sort_unstable();
    splits.test.sort_unstable();
    Ok(splits)
}
