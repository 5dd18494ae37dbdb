//! Bootstrap decision forest for the signal metrics.
//!
//! Classification trees grow without a depth limit using Gini impurity; a node
//! splits while it holds at least `min_samples_split` distinct samples and is
//! impure. Each split looks at a random subset of `max_features` features and
//! keeps drawing further features only if none of those admits a split.
//! Bootstrap duplicates are carried as integer weights. Predictions average the
//! leaf class distributions over trees.

use crate::rng::DeterministicStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub trees: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` means `floor(sqrt(dim))`, at least 1.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 100,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

pub fn default_max_features(dim: usize) -> usize {
    ((dim as f64).sqrt().floor() as usize).max(1)
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Vec<f64>),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(p) => return p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<Tree>,
    classes: usize,
    dim: usize,
}

/// Training data: row-major `x` with `dim` columns and labels below `classes`.
pub struct Samples<'a> {
    pub x: &'a [f64],
    pub dim: usize,
    pub y: &'a [usize],
    pub classes: usize,
}

impl RandomForest {
    pub fn fit(
        data: &Samples<'_>,
        config: &ForestConfig,
        stream: &mut DeterministicStream,
    ) -> Self {
        let n = data.y.len();
        assert_eq!(data.x.len(), n * data.dim, "feature matrix shape");
        assert!(n > 0, "forest needs at least one sample");
        let max_features = config
            .max_features
            .unwrap_or_else(|| default_max_features(data.dim))
            .clamp(1, data.dim.max(1));
        let trees = (0..config.trees)
            .map(|_| {
                let mut weight = vec![0u32; n];
                for _ in 0..n {
                    weight[stream.index_below(n)] += 1;
                }
                let members: Vec<usize> = (0..n).filter(|&i| weight[i] > 0).collect();
                grow(data, &weight, members, config, max_features, stream)
            })
            .collect();
        Self {
            trees,
            classes: data.classes,
            dim: data.dim,
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.dim);
        let mut acc = vec![0.0; self.classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.leaf(row)) {
                *a += p;
            }
        }
        let t = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= t);
        acc
    }

    /// Most probable class; ties go to the smallest label.
    pub fn predict(&self, row: &[f64]) -> usize {
        let p = self.predict_proba(row);
        let mut best = 0;
        for c in 1..p.len() {
            if p[c] > p[best] {
                best = c;
            }
        }
        best
    }
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

fn grow(
    data: &Samples<'_>,
    weight: &[u32],
    mut members: Vec<usize>,
    config: &ForestConfig,
    max_features: usize,
    stream: &mut DeterministicStream,
) -> Tree {
    let mut nodes = vec![Node::Leaf(Vec::new())];
    let mut pending = vec![(0usize, 0usize, members.len())];
    let mut features: Vec<usize> = (0..data.dim).collect();
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(members.len());

    while let Some((id, lo, hi)) = pending.pop() {
        let slice = &members[lo..hi];
        let mut counts = vec![0.0; data.classes];
        for &i in slice {
            counts[data.y[i]] += weight[i] as f64;
        }
        let total: f64 = counts.iter().sum();
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let split = if pure || slice.len() < config.min_samples_split.max(2) {
            None
        } else {
            find_split(data, weight, slice, &counts, config, max_features, &mut features, &mut keyed, stream)
        };
        let Some(split) = split else {
            nodes[id] = Node::Leaf(counts.iter().map(|c| c / total).collect());
            continue;
        };
        let seg = &mut members[lo..hi];
        let mut mid = 0;
        for j in 0..seg.len() {
            if data.x[seg[j] * data.dim + split.feature] <= split.threshold {
                seg.swap(mid, j);
                mid += 1;
            }
        }
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf(Vec::new()));
        nodes.push(Node::Leaf(Vec::new()));
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        pending.push((right, lo + mid, hi));
        pending.push((left, lo, lo + mid));
    }
    Tree { nodes }
}

#[allow(clippy::too_many_arguments)]
fn find_split(
    data: &Samples<'_>,
    weight: &[u32],
    slice: &[usize],
    counts: &[f64],
    config: &ForestConfig,
    max_features: usize,
    features: &mut [usize],
    keyed: &mut Vec<(f64, usize)>,
    stream: &mut DeterministicStream,
) -> Option<BestSplit> {
    let total: f64 = counts.iter().sum();
    let total_sq: f64 = counts.iter().map(|c| c * c).sum();
    let parent = total_sq / total;
    let min_leaf = config.min_samples_leaf.max(1);
    let mut best: Option<BestSplit> = None;
    let mut left = vec![0.0; counts.len()];

    for drawn in 0..features.len() {
        if drawn >= max_features && best.is_some() {
            break;
        }
        let pick = drawn + stream.index_below(features.len() - drawn);
        features.swap(drawn, pick);
        let f = features[drawn];

        keyed.clear();
        keyed.extend(slice.iter().map(|&i| (data.x[i * data.dim + f], i)));
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if keyed[0].0 == keyed[keyed.len() - 1].0 {
            continue;
        }
        left.iter_mut().for_each(|c| *c = 0.0);
        let (mut w_left, mut sq_left, mut sq_right) = (0.0, 0.0, total_sq);
        for j in 0..keyed.len() - 1 {
            let (value, i) = keyed[j];
            let (c, w) = (data.y[i], weight[i] as f64);
            let right_c = counts[c] - left[c];
            sq_right += (right_c - w) * (right_c - w) - right_c * right_c;
            sq_left += (left[c] + w) * (left[c] + w) - left[c] * left[c];
            left[c] += w;
            w_left += w;
            let next = keyed[j + 1].0;
            if next == value || j + 1 < min_leaf || keyed.len() - j - 1 < min_leaf {
                continue;
            }
            let score = sq_left / w_left + sq_right / (total - w_left);
            if score > parent + 1e-12 && best.as_ref().is_none_or(|b| score > b.score) {
                let mut threshold = value + (next - value) / 2.0;
                if threshold >= next {
                    threshold = value;
                }
                best = Some(BestSplit {
                    score,
                    feature: f,
                    threshold,
                });
            }
        }
    }
    best
}
