//! Randomized sensitivity harness: many families with randomly drawn
//! parameters, correlated at the family level against validation metrics.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::report::{validate_family, ValidationOptions, ValidationReport};
use super::stats::{mean, pearson_test, CorrelationTest};
use crate::rng::{DeterministicStream, Domain};
use crate::types::{FamilyConfig, UniverseConfig};
use crate::universe::build_universe;

/// Sampling space for one harness run. Range-valued parameters get a random
/// sub-range whose width is a random share of the span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityConfig {
    pub families: usize,
    pub graphs_per_family: usize,
    pub seed: u64,
    pub community_count: usize,
    pub edge_propensity_variance: (f64, f64),
    pub feature_dim: (usize, usize),
    pub center_variance: (f64, f64),
    pub cluster_variance: (f64, f64),
    pub min_nodes: (usize, usize),
    pub max_nodes: (usize, usize),
    /// Smallest gap between the node-count bounds.
    pub node_gap: usize,
    pub min_communities: (usize, usize),
    pub max_communities: (usize, usize),
    pub homophily: (f64, f64),
    pub avg_degree: (f64, f64),
    pub degree_separation: (f64, f64),
    pub power_law_exponent: (f64, f64),
    /// Share of the span covered by a sampled sub-range.
    pub range_width: (f64, f64),
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            families: 100,
            graphs_per_family: 30,
            seed: 0,
            community_count: 15,
            edge_propensity_variance: (0.0, 1.0),
            feature_dim: (10, 100),
            center_variance: (0.1, 1.0),
            cluster_variance: (0.1, 1.0),
            min_nodes: (50, 400),
            max_nodes: (100, 1000),
            node_gap: 50,
            min_communities: (2, 15),
            max_communities: (4, 15),
            homophily: (0.0, 1.0),
            avg_degree: (2.0, 20.0),
            degree_separation: (0.0, 1.0),
            power_law_exponent: (1.5, 4.5),
            range_width: (0.05, 0.2),
        }
    }
}

/// Parameters correlated by the harness, in row order.
pub const PARAMETERS: [&str; 10] = [
    "edge_propensity_variance",
    "feature_dim",
    "center_variance",
    "cluster_variance",
    "node_count",
    "community_count",
    "homophily",
    "avg_degree",
    "degree_separation",
    "power_law_exponent",
];

/// Family-level metrics, in column order.
pub const METRICS: [&str; 11] = [
    "homophily",
    "avg_degree",
    "degree_tail_ratio_99",
    "generation_time_sec",
    "prob_matrix_deviation",
    "feature_signal_f1",
    "degree_signal_f1",
    "structure_signal_f1",
    "feature_consistency",
    "structure_consistency",
    "degree_consistency",
];

/// Correlations expected to be significant, with their sign:
/// `(parameter, metric, sign)`.
pub const EXPECTED_SIGNS: [(&str, &str, f64); 10] = [
    ("homophily", "homophily", 1.0),
    ("avg_degree", "avg_degree", 1.0),
    ("power_law_exponent", "degree_tail_ratio_99", -1.0),
    ("cluster_variance", "feature_signal_f1", -1.0),
    ("cluster_variance", "feature_consistency", -1.0),
    ("degree_separation", "degree_consistency", 1.0),
    ("edge_propensity_variance", "structure_consistency", 1.0),
    ("community_count", "feature_signal_f1", -1.0),
    ("community_count", "degree_signal_f1", -1.0),
    ("community_count", "structure_signal_f1", -1.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub parameter: String,
    pub metric: String,
    pub expected_sign: f64,
    pub test: Option<CorrelationTest>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFamily {
    pub universe: UniverseConfig,
    pub family: FamilyConfig,
}

/// Parameter and metric values of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub family_index: usize,
    /// Universe-level values as drawn; family-level values are means of the
    /// per-graph parameters actually used.
    pub parameters: Vec<f64>,
    pub metrics: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub parameters: Vec<String>,
    pub metrics: Vec<String>,
    /// `cells[p][m]`; `None` when either side has no variance.
    pub cells: Vec<Vec<Option<CorrelationTest>>>,
    pub families_used: usize,
    pub failed_families: usize,
    pub points: Vec<FamilyPoint>,
}

impl SensitivityResult {
    pub fn cell(&self, parameter: &str, metric: &str) -> Option<CorrelationTest> {
        let p = self.parameters.iter().position(|x| x == parameter)?;
        let m = self.metrics.iter().position(|x| x == metric)?;
        self.cells[p][m]
    }

    /// Each expected correlation: significant and with the expected sign.
    pub fn sign_checks(&self) -> Vec<SignCheck> {
        EXPECTED_SIGNS
            .iter()
            .map(|&(parameter, metric, sign)| {
                let test = self.cell(parameter, metric);
                SignCheck {
                    parameter: parameter.into(),
                    metric: metric.into(),
                    expected_sign: sign,
                    test,
                    passed: test.is_some_and(|t| t.significant && t.pearson_r * sign > 0.0),
                }
            })
            .collect()
    }

    /// Matrix of `r` values with `p` values, one row per parameter.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["parameter".to_string()];
        for m in &self.metrics {
            header.push(format!("{m}_r"));
            header.push(format!("{m}_p"));
        }
        writer.write_record(&header)?;
        for (name, row) in self.parameters.iter().zip(&self.cells) {
            let mut record = vec![name.clone()];
            for cell in row {
                match cell {
                    Some(c) => {
                        record.push(format!("{:.17e}", c.pearson_r));
                        record.push(format!("{:.17e}", c.p_value));
                    }
                    None => record.extend([String::new(), String::new()]),
                }
            }
            writer.write_record(&record)?;
        }
        writer.flush()
    }
}

fn sub_range(stream: &mut DeterministicStream, (lo, hi): (f64, f64), width: (f64, f64)) -> (f64, f64) {
    let w = stream.uniform_in(width.0, width.1) * (hi - lo);
    let start = stream.uniform_in(lo, hi - w);
    (start, start + w)
}

/// Draws the universe and family configuration of family `index`.
pub fn sample_family(config: &SensitivityConfig, index: usize) -> SampledFamily {
    let mut s = DeterministicStream::from_words(Domain::Sensitivity, &[config.seed, index as u64]);
    let universe = UniverseConfig {
        community_count: config.community_count,
        edge_propensity_variance: s.uniform_in(config.edge_propensity_variance.0, config.edge_propensity_variance.1),
        feature_dim: s.integer_in(config.feature_dim.0, config.feature_dim.1),
        center_variance: s.uniform_in(config.center_variance.0, config.center_variance.1),
        cluster_variance: s.uniform_in(config.cluster_variance.0, config.cluster_variance.1),
        seed: s.next_u64(),
    };
    let n_min = s.integer_in(config.min_nodes.0, config.min_nodes.1);
    let n_max = s.integer_in(config.max_nodes.0.max(n_min + config.node_gap), config.max_nodes.1);
    let k_min = s.integer_in(config.min_communities.0, config.min_communities.1);
    let k_max = s.integer_in(config.max_communities.0.max(k_min), config.max_communities.1);
    let family = FamilyConfig {
        graph_count: config.graphs_per_family,
        node_range: (n_min, n_max),
        community_range: (k_min, k_max),
        homophily_range: sub_range(&mut s, config.homophily, config.range_width),
        degree_range: sub_range(&mut s, config.avg_degree, config.range_width),
        degree_separation_range: sub_range(&mut s, config.degree_separation, config.range_width),
        power_law_range: sub_range(&mut s, config.power_law_exponent, config.range_width),
        seed: Some(s.next_u64()),
    };
    SampledFamily { universe, family }
}

fn family_point(index: usize, sampled: &SampledFamily, report: &ValidationReport, params: &[crate::GraphParams]) -> FamilyPoint {
    let avg = |f: fn(&crate::GraphParams) -> f64| mean(&params.iter().map(f).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let u = &sampled.universe;
    FamilyPoint {
        family_index: index,
        parameters: vec![
            u.edge_propensity_variance,
            u.feature_dim as f64,
            u.center_variance,
            u.cluster_variance,
            avg(|p| p.node_count as f64),
            avg(|p| p.community_count as f64),
            avg(|p| p.homophily),
            avg(|p| p.avg_degree),
            avg(|p| p.degree_separation),
            avg(|p| p.power_law_exponent),
        ],
        metrics: METRICS
            .iter()
            .map(|&m| match m {
                "feature_consistency" => report.feature_consistency,
                _ => report.mean(m),
            })
            .collect(),
    }
}

/// Generates and validates every family, then correlates each parameter
/// with each family-mean metric. `progress` counts finished families.
pub fn run_sensitivity(
    config: &SensitivityConfig,
    options: &ValidationOptions,
    progress: &AtomicUsize,
) -> SensitivityResult {
    let mut points = Vec::new();
    let mut failed = 0;
    for index in 0..config.families {
        let sampled = sample_family(config, index);
        let outcome = build_universe(&sampled.universe)
            .and_then(|u| crate::generate_family(&u, &sampled.family).map(|f| (u, f)));
        match outcome {
            Ok((universe, family)) => {
                let opts = ValidationOptions {
                    seed: options.seed ^ index as u64,
                    ..*options
                };
                let report = validate_family(&universe, &family.instances, Some(&family.generation_secs), &opts);
                let params: Vec<_> = family.instances.iter().map(|g| g.params.clone()).collect();
                points.push(family_point(index, &sampled, &report, &params));
            }
            Err(e) => {
                log::warn!("sensitivity family {index} failed: {e}");
                failed += 1;
            }
        }
        progress.fetch_add(1, Ordering::Relaxed);
    }

    let cells = (0..PARAMETERS.len())
        .map(|p| {
            (0..METRICS.len())
                .map(|m| {
                    let (xs, ys): (Vec<f64>, Vec<f64>) = points
                        .iter()
                        .filter_map(|pt| Some((pt.parameters[p], pt.metrics[m]?)))
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                        .unzip();
                    pearson_test(&xs, &ys)
                })
                .collect()
        })
        .collect();
    SensitivityResult {
        parameters: PARAMETERS.iter().map(|s| s.to_string()).collect(),
        metrics: METRICS.iter().map(|s| s.to_string()).collect(),
        cells,
        families_used: points.len(),
        failed_families: failed,
        points,
    }
}
