//! Per-family validation report.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::consistency::{degree_consistency, feature_consistency, structure_consistency};
use super::forest::ForestConfig;
use super::metrics::{average_degree, degree_tail_ratio_99, graph_homophily, prob_matrix_deviation};
use super::signal::{signal_strength, Signal, TEST_FRACTION};
use crate::rng::{DeterministicStream, Domain};
use crate::types::{GraphInstance, Universe};

/// Which block-probability target the deviation metric compares against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationTarget {
    /// The scaled Bernoulli target `P*` only.
    #[default]
    #[serde(rename = "pstar")]
    PStar,
    /// `P*`, plus the raw propensity submatrix `P_sub` in a second column.
    #[serde(rename = "psub")]
    PSub,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Keys the forest and split streams.
    pub seed: u64,
    pub forest: ForestConfig,
    pub deviation_target: DeviationTarget,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            forest: ForestConfig::default(),
            deviation_target: DeviationTarget::PStar,
        }
    }
}

/// Metrics of one graph; `None` marks a metric whose preconditions failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub graph_index: usize,
    pub homophily: Option<f64>,
    pub avg_degree: Option<f64>,
    pub degree_tail_ratio_99: Option<f64>,
    pub generation_time_sec: Option<f64>,
    pub prob_matrix_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_matrix_deviation_psub: Option<f64>,
    pub feature_signal_f1: Option<f64>,
    pub degree_signal_f1: Option<f64>,
    pub structure_signal_f1: Option<f64>,
    pub structure_consistency: Option<f64>,
    pub degree_consistency: Option<f64>,
}

impl GraphRecord {
    /// `(name, value)` for every per-graph metric, in column order.
    pub fn metrics(&self) -> Vec<(&'static str, Option<f64>)> {
        let mut out = vec![
            ("homophily", self.homophily),
            ("avg_degree", self.avg_degree),
            ("degree_tail_ratio_99", self.degree_tail_ratio_99),
            ("generation_time_sec", self.generation_time_sec),
            ("prob_matrix_deviation", self.prob_matrix_deviation),
        ];
        if self.prob_matrix_deviation_psub.is_some() {
            out.push(("prob_matrix_deviation_psub", self.prob_matrix_deviation_psub));
        }
        out.extend([
            ("feature_signal_f1", self.feature_signal_f1),
            ("degree_signal_f1", self.degree_signal_f1),
            ("structure_signal_f1", self.structure_signal_f1),
            ("structure_consistency", self.structure_consistency),
            ("degree_consistency", self.degree_consistency),
        ]);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Graphs with a value for this metric.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestSettings {
    pub trees: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: String,
    pub test_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub forest: ForestSettings,
    pub deviation_target: DeviationTarget,
    pub graphs: Vec<GraphRecord>,
    pub feature_consistency: Option<f64>,
    pub summary: BTreeMap<String, MetricSummary>,
}

fn signal_stream(seed: u64, graph_index: usize, signal: Signal) -> DeterministicStream {
    DeterministicStream::from_words(Domain::Validation, &[seed, graph_index as u64, signal as u64])
}

/// Runs every metric. `generation_secs[i]` is the wall-clock time of
/// `instances[i]` when known.
pub fn validate_family(
    universe: &Universe,
    instances: &[GraphInstance],
    generation_secs: Option<&[f64]>,
    options: &ValidationOptions,
) -> ValidationReport {
    let mut graphs: Vec<GraphRecord> = instances
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let signal = |s: Signal| {
                let mut stream = signal_stream(options.seed, g.graph_index, s);
                signal_strength(g, s, &options.forest, &mut stream)
            };
            let propensity = (options.deviation_target == DeviationTarget::PSub)
                .then(|| prob_matrix_deviation(g, &universe.propensity.submatrix(&g.communities)));
            GraphRecord {
                graph_index: g.graph_index,
                homophily: graph_homophily(g),
                avg_degree: Some(average_degree(g)),
                degree_tail_ratio_99: degree_tail_ratio_99(g),
                generation_time_sec: generation_secs.and_then(|t| t.get(i).copied()),
                prob_matrix_deviation: Some(prob_matrix_deviation(g, &g.p_star)),
                prob_matrix_deviation_psub: propensity,
                feature_signal_f1: signal(Signal::Feature),
                degree_signal_f1: signal(Signal::Degree),
                structure_signal_f1: signal(Signal::Structure),
                structure_consistency: structure_consistency(g, universe),
                degree_consistency: None,
            }
        })
        .collect();
    for (record, value) in graphs.iter_mut().zip(degree_consistency(instances, universe)) {
        record.degree_consistency = value;
    }

    let mut columns: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    for record in &graphs {
        for (name, value) in record.metrics() {
            let column = columns.entry(name).or_default();
            if let Some(v) = value {
                column.push(v);
            }
        }
    }
    let summary = columns
        .into_iter()
        .filter_map(|(name, values)| {
            let mean = super::stats::mean(&values)?;
            let std = super::stats::std_dev(&values)?;
            Some((
                name.to_string(),
                MetricSummary {
                    mean,
                    std,
                    count: values.len(),
                },
            ))
        })
        .collect();

    ValidationReport {
        forest: ForestSettings {
            trees: options.forest.trees,
            min_samples_split: options.forest.min_samples_split,
            min_samples_leaf: options.forest.min_samples_leaf,
            max_features: match options.forest.max_features {
                Some(m) => m.to_string(),
                None => "floor(sqrt(dim)), at least 1".into(),
            },
            test_fraction: TEST_FRACTION,
        },
        deviation_target: options.deviation_target,
        graphs,
        feature_consistency: feature_consistency(instances),
        summary,
    }
}

impl ValidationReport {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.summary.get(metric).map(|s| s.mean)
    }

    /// One row per graph; missing values are empty cells. Family aggregates
    /// follow as a `#`-prefixed JSON line.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        if let Some(first) = self.graphs.first() {
            let mut header = vec!["graph_index"];
            header.extend(first.metrics().iter().map(|(name, _)| *name));
            writer.write_record(&header)?;
        }
        for record in &self.graphs {
            let mut row = vec![record.graph_index.to_string()];
            row.extend(
                record
                    .metrics()
                    .iter()
                    .map(|(_, v)| v.map(|v| format!("{v:.17e}")).unwrap_or_default()),
            );
            writer.write_record(&row)?;
        }
        writer.flush()?;
        let mut out = writer.into_inner().map_err(|e| e.into_error())?;
        let footer = serde_json::json!({
            "feature_consistency": self.feature_consistency,
            "summary": self.summary,
        });
        writeln!(out, "# family {footer}")
    }
}
