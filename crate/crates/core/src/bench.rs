//! Single-threaded generation timing across graph sizes.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sampler::generate_graph;
use crate::types::{FamilyConfig, UniverseConfig};
use crate::universe::build_universe;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub avg_nodes: f64,
    pub avg_edges: f64,
    pub time_per_graph_sec: f64,
    pub throughput_graphs_per_sec: f64,
    /// Fit of per-graph time against edge count within this size.
    pub r_squared: Option<f64>,
    pub graphs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    /// Fit of mean time per graph against mean edge count across sizes.
    pub r_squared: Option<f64>,
}

/// Ordinary least squares `y = a + b x`, returning `(a, b, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Some((intercept, slope, 1.0 - residual / syy))
}

/// Times `per_size` graphs at each node count on the calling thread. Other
/// family parameters come from `base`. Sizes are visited round-robin so that
/// drift in machine speed spreads evenly over them.
pub fn run_benchmark(
    universe: &UniverseConfig,
    base: &FamilyConfig,
    sizes: &[usize],
    per_size: usize,
) -> Result<BenchResult> {
    let universe = build_universe(universe)?;
    let families = sizes
        .iter()
        .map(|&n| {
            let family = FamilyConfig {
                graph_count: per_size,
                node_range: (n, n),
                ..base.clone()
            };
            family.validate(universe.config.community_count).map(|_| family)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut times = vec![Vec::with_capacity(per_size); sizes.len()];
    let mut edges = vec![Vec::with_capacity(per_size); sizes.len()];
    let mut nodes = vec![0usize; sizes.len()];
    for i in 0..per_size {
        for (s, family) in families.iter().enumerate() {
            let start = Instant::now();
            let g = generate_graph(&universe, family, i)?;
            times[s].push(start.elapsed().as_secs_f64());
            edges[s].push(g.edges.len() as f64);
            nodes[s] += g.node_count();
        }
    }
    let count = per_size.max(1) as f64;
    let rows: Vec<BenchRow> = (0..sizes.len())
        .map(|s| {
            let total: f64 = times[s].iter().sum();
            BenchRow {
                avg_nodes: nodes[s] as f64 / count,
                avg_edges: edges[s].iter().sum::<f64>() / count,
                time_per_graph_sec: total / count,
                throughput_graphs_per_sec: if total > 0.0 { count / total } else { f64::INFINITY },
                r_squared: linear_fit(&edges[s], &times[s]).map(|f| f.2),
                graphs: per_size,
            }
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.avg_edges).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.time_per_graph_sec).collect();
    Ok(BenchResult {
        r_squared: linear_fit(&x, &y).map(|f| f.2),
        rows,
    })
}

impl BenchResult {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}
