//! Domain types shared by the generator, the validators and the file format.
//!
//! Field declaration order is the canonical key order of the JSON format, so
//! reordering fields here is a format change.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Dense row-major square matrix, serialized as an array of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Self {
            dim,
            data: vec![value; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for s in 0..dim {
                m.data[r * dim + s] = f(r, s);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.data[r * self.dim + s]
    }

    #[inline]
    pub fn set(&mut self, r: usize, s: usize, value: f64) {
        self.data[r * self.dim + s] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|r| (0..r).all(|s| self.get(r, s) == self.get(s, r)))
    }

    /// Principal submatrix on the given index list, in list order.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), |r, s| self.get(indices[r], indices[s]))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMatrix {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> std::result::Result<Self, String> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(format!("row {i} has {} entries, expected {dim}", row.len()));
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }
}

impl From<SquareMatrix> for Vec<Vec<f64>> {
    fn from(m: SquareMatrix) -> Self {
        m.data.chunks(m.dim.max(1)).map(<[f64]>::to_vec).take(m.dim).collect()
    }
}

/// Global settings of a universe of persistent communities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UniverseConfig {
    pub community_count: usize,
    pub edge_propensity_variance: f64,
    pub feature_dim: usize,
    pub center_variance: f64,
    pub cluster_variance: f64,
    pub seed: u64,
}

impl Default for UniverseConfig {
    fn default() -> Self {
        Self {
            community_count: 10,
            edge_propensity_variance: 0.5,
            feature_dim: 15,
            center_variance: 0.2,
            cluster_variance: 0.5,
            seed: 42,
        }
    }
}

impl UniverseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.community_count < 2 {
            return Err(invalid("community_count", "must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.edge_propensity_variance) {
            return Err(invalid("edge_propensity_variance", "must lie in [0, 1]"));
        }
        if self.feature_dim < 1 {
            return Err(invalid("feature_dim", "must be at least 1"));
        }
        if !(self.center_variance > 0.0) || !self.center_variance.is_finite() {
            return Err(invalid("center_variance", "must be positive"));
        }
        if !(self.cluster_variance > 0.0) || !self.cluster_variance.is_finite() {
            return Err(invalid("cluster_variance", "must be positive"));
        }
        Ok(())
    }
}

/// The persistent world every graph of a family is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Universe {
    pub config: UniverseConfig,
    pub propensity: SquareMatrix,
    pub degree_centers: Vec<f64>,
    pub centroids: Vec<Vec<f64>>,
}

/// Sampling ranges for per-graph parameters. All ranges are closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    pub graph_count: usize,
    pub node_range: (usize, usize),
    pub community_range: (usize, usize),
    pub homophily_range: (f64, f64),
    pub degree_range: (f64, f64),
    pub degree_separation_range: (f64, f64),
    pub power_law_range: (f64, f64),
    /// Falls back to the universe seed when absent.
    pub seed: Option<u64>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            graph_count: 1000,
            node_range: (50, 200),
            community_range: (4, 6),
            homophily_range: (0.4, 0.6),
            degree_range: (1.0, 5.0),
            degree_separation_range: (0.5, 0.8),
            power_law_range: (2.0, 2.5),
            seed: None,
        }
    }
}

fn ordered_f64(field: &'static str, (lo, hi): (f64, f64)) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(field, "bounds must be finite"));
    }
    if lo > hi {
        return Err(invalid(field, format!("min {lo} exceeds max {hi}")));
    }
    Ok(())
}

impl FamilyConfig {
    /// Checks the ranges on their own and against a universe of `community_count` communities.
    pub fn validate(&self, community_count: usize) -> Result<()> {
        let (n_min, n_max) = self.node_range;
        let (k_min, k_max) = self.community_range;
        if n_min < 1 || n_min > n_max {
            return Err(invalid("node_range", "need 1 <= min <= max"));
        }
        if k_min < 1 || k_min > k_max {
            return Err(invalid("community_range", "need 1 <= min <= max"));
        }
        if k_max > community_count {
            return Err(invalid(
                "community_range",
                format!("max {k_max} exceeds universe community count {community_count}"),
            ));
        }
        if n_min < k_max {
            return Err(invalid(
                "node_range",
                format!("min node count {n_min} is below max community count {k_max}"),
            ));
        }
        ordered_f64("homophily_range", self.homophily_range)?;
        if self.homophily_range.0 < 0.0 || self.homophily_range.1 > 1.0 {
            return Err(invalid("homophily_range", "must lie in [0, 1]"));
        }
        ordered_f64("degree_range", self.degree_range)?;
        if !(self.degree_range.0 > 0.0) {
            return Err(invalid("degree_range", "average degree must be positive"));
        }
        ordered_f64("degree_separation_range", self.degree_separation_range)?;
        if self.degree_separation_range.0 < 0.0 || self.degree_separation_range.1 > 1.0 {
            return Err(invalid("degree_separation_range", "must lie in [0, 1]"));
        }
        ordered_f64("power_law_range", self.power_law_range)?;
        if !(self.power_law_range.0 > 1.0) {
            return Err(invalid("power_law_range", "exponent must exceed 1"));
        }
        Ok(())
    }

    pub fn effective_seed(&self, universe: &Universe) -> u64 {
        self.seed.unwrap_or(universe.config.seed)
    }
}

/// Parameters realized for one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub node_count: usize,
    pub community_count: usize,
    pub homophily: f64,
    pub avg_degree: f64,
    pub degree_separation: f64,
    pub power_law_exponent: f64,
}

/// One realized graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInstance {
    pub graph_index: usize,
    pub params: GraphParams,
    /// Universe community ids, ascending.
    pub communities: Vec<usize>,
    /// Per-node index into `communities`.
    pub node_community: Vec<usize>,
    /// Undirected edges `[u, v]` with `u < v`, sorted.
    pub edges: Vec<[usize; 2]>,
    pub theta: Vec<f64>,
    pub feature_dim: usize,
    /// Row-major `node_count x feature_dim`.
    pub features: Vec<f64>,
    pub p_star: SquareMatrix,
    /// Entries of `p_star` clipped at 1.
    pub clip_count: usize,
    /// Intra and inter factors on `p_star` that offset saturated pairs; edges
    /// are drawn from `min(1, theta_i theta_j min(1, f P*))`.
    pub saturation_compensation: [f64; 2],
    /// Node pairs realized with probability 1.
    pub saturated_pairs: usize,
    pub repair_edge_count: usize,
}

impl GraphInstance {
    pub fn node_count(&self) -> usize {
        self.node_community.len()
    }

    /// Block probabilities the edges were drawn from.
    pub fn sampling_matrix(&self) -> SquareMatrix {
        let [intra, inter] = self.saturation_compensation;
        crate::sampler::compensated_matrix(&self.p_star, intra, inter)
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count()];
        for &c in &self.node_community {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn feature_row(&self, node: usize) -> &[f64] {
        &self.features[node * self.feature_dim..(node + 1) * self.feature_dim]
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for &[u, v] in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        adjacency(self.node_count(), &self.edges)
    }

    pub fn is_connected(&self) -> bool {
        component_count(self.node_count(), &self.edges) <= 1
    }

    /// Checks every structural invariant a generated graph must satisfy.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.node_count();
        let k = self.community_count();
        if self.theta.len() != n || self.features.len() != n * self.feature_dim {
            return Err("per-node arrays have inconsistent lengths".into());
        }
        if self.p_star.dim() != k {
            return Err("scaled matrix dimension differs from community count".into());
        }
        if self.communities.windows(2).any(|w| w[0] >= w[1]) {
            return Err("community ids are not strictly increasing".into());
        }
        if self.node_community.iter().any(|&c| c >= k) {
            return Err("node community index out of range".into());
        }
        let sizes = self.community_sizes();
        let (lo, hi) = (
            sizes.iter().copied().min().unwrap_or(0),
            sizes.iter().copied().max().unwrap_or(0),
        );
        if k > 0 && (lo == 0 || hi - lo > 1) {
            return Err(format!("community sizes are not balanced: {sizes:?}"));
        }
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return Err("edge list is not sorted and duplicate-free".into());
            }
        }
        if self.edges.iter().any(|&[u, v]| u >= v || v >= n) {
            return Err("edge endpoints invalid (self-loop, order, or range)".into());
        }
        if n > 0 {
            let mean = self.theta.iter().sum::<f64>() / n as f64;
            if (mean - 1.0).abs() > 1e-9 {
                return Err(format!("mean degree factor is {mean}, expected 1"));
            }
        }
        if !self.is_connected() {
            return Err("graph is not connected".into());
        }
        Ok(())
    }
}

pub(crate) fn adjacency(n: usize, edges: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &[u, v] in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Disjoint-set forest with path halving and union by size.
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Connected components as ascending node lists, ordered by smallest member.
pub(crate) fn components(n: usize, edges: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut sets = DisjointSets::new(n);
    for &[u, v] in edges {
        sets.union(u, v);
    }
    let mut slot = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let root = sets.find(v);
        if slot[root] == usize::MAX {
            slot[root] = out.len();
            out.push(Vec::new());
        }
        out[slot[root]].push(v);
    }
    out
}

pub(crate) fn component_count(n: usize, edges: &[[usize; 2]]) -> usize {
    components(n, edges).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_json_shape() {
        let m = SquareMatrix::from_fn(2, |r, s| (r * 2 + s) as f64);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[0.0,1.0],[2.0,3.0]]");
        let back: SquareMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SquareMatrix>("[[1.0],[2.0,3.0]]").is_err());
    }

    #[test]
    fn universe_config_bounds() {
        let mut c = UniverseConfig::default();
        assert!(c.validate().is_ok());
        c.community_count = 1;
        assert!(c.validate().is_err());
        let c = UniverseConfig {
            edge_propensity_variance: 1.5,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn family_config_bounds() {
        let f = FamilyConfig::default();
        assert!(f.validate(10).is_ok());
        assert!(f.validate(5).is_err());
        let f = FamilyConfig {
            power_law_range: (1.0, 2.0),
            ..Default::default()
        };
        assert!(f.validate(10).is_err());
        let f = FamilyConfig {
            homophily_range: (0.6, 0.4),
            ..Default::default()
        };
        assert!(f.validate(10).is_err());
    }

    #[test]
    fn components_are_ordered() {
        let comps = components(5, &[[3, 4], [0, 2]]);
        assert_eq!(comps, vec![vec![0, 2], vec![1], vec![3, 4]]);
    }
}
