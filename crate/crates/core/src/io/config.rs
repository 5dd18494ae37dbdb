//! Generator configuration files (TOML or JSON).
//!
//! Keys are snake case, e.g. `number_of_communities`, `min_node_count`,
//! `homophily_range`. The field names of [`UniverseConfig`] and [`FamilyConfig`] are accepted as aliases.
//! Missing keys take the inductive defaults, or the transductive ones when
//! `mode = "transductive"`. `degree_heterogeneity` and `use_dccc_sbm` are
//! accepted but have no effect.

use serde::Deserialize;
use thiserror::Error;

use super::dataset::DatasetMode;
use crate::types::{FamilyConfig, UniverseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Toml,
    Json,
}

impl ConfigFormat {
    /// Picks the format from a file extension; anything but `.json` is TOML.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ConfigFormat::Json,
            _ => ConfigFormat::Toml,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub mode: DatasetMode,
    pub universe: UniverseConfig,
    pub family: FamilyConfig,
    /// Notes about accepted-but-ignored keys.
    pub warnings: Vec<String>,
}

impl GeneratorConfig {
    pub fn defaults(mode: DatasetMode) -> Self {
        let family = match mode {
            DatasetMode::Inductive => FamilyConfig::default(),
            DatasetMode::Transductive => FamilyConfig {
                graph_count: 1,
                node_range: (1000, 1000),
                community_range: (10, 10),
                homophily_range: (0.5, 0.5),
                degree_range: (2.5, 2.5),
                degree_separation_range: (0.5, 0.5),
                power_law_range: (2.5, 2.5),
                seed: None,
            },
        };
        Self {
            mode,
            universe: UniverseConfig::default(),
            family,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    mode: Option<DatasetMode>,
    #[serde(default)]
    universe: RawUniverse,
    #[serde(default)]
    family: RawFamily,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUniverse {
    #[serde(alias = "community_count")]
    number_of_communities: Option<usize>,
    #[serde(alias = "feature_dim")]
    feature_dimension: Option<usize>,
    center_variance: Option<f64>,
    cluster_variance: Option<f64>,
    edge_propensity_variance: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    #[serde(alias = "graph_count")]
    number_of_graphs: Option<usize>,
    min_node_count: Option<usize>,
    max_node_count: Option<usize>,
    min_communities: Option<usize>,
    max_communities: Option<usize>,
    homophily_range: Option<(f64, f64)>,
    #[serde(alias = "degree_range")]
    average_degree_range: Option<(f64, f64)>,
    degree_separation_range: Option<(f64, f64)>,
    #[serde(alias = "power_law_range")]
    power_law_exponent_range: Option<(f64, f64)>,
    degree_distribution: Option<String>,
    degree_heterogeneity: Option<f64>,
    use_dccc_sbm: Option<bool>,
    seed: Option<u64>,
}

/// Parses a config; `force_transductive` overrides the file's mode.
pub fn parse_config(text: &str, format: ConfigFormat, force_transductive: bool) -> Result<GeneratorConfig, ConfigError> {
    let raw: RawFile = match format {
        ConfigFormat::Toml => toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?,
        ConfigFormat::Json => serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?,
    };
    let mode = if force_transductive {
        DatasetMode::Transductive
    } else {
        raw.mode.unwrap_or(DatasetMode::Inductive)
    };
    let mut config = GeneratorConfig::defaults(mode);

    let u = raw.universe;
    let uc = &mut config.universe;
    uc.community_count = u.number_of_communities.unwrap_or(uc.community_count);
    uc.feature_dim = u.feature_dimension.unwrap_or(uc.feature_dim);
    uc.center_variance = u.center_variance.unwrap_or(uc.center_variance);
    uc.cluster_variance = u.cluster_variance.unwrap_or(uc.cluster_variance);
    uc.edge_propensity_variance = u.edge_propensity_variance.unwrap_or(uc.edge_propensity_variance);
    uc.seed = u.seed.unwrap_or(uc.seed);

    let f = raw.family;
    let fc = &mut config.family;
    fc.graph_count = f.number_of_graphs.unwrap_or(fc.graph_count);
    fc.node_range = (
        f.min_node_count.unwrap_or(fc.node_range.0),
        f.max_node_count.unwrap_or(fc.node_range.1),
    );
    fc.community_range = (
        f.min_communities.unwrap_or(fc.community_range.0),
        f.max_communities.unwrap_or(fc.community_range.1),
    );
    fc.homophily_range = f.homophily_range.unwrap_or(fc.homophily_range);
    fc.degree_range = f.average_degree_range.unwrap_or(fc.degree_range);
    fc.degree_separation_range = f.degree_separation_range.unwrap_or(fc.degree_separation_range);
    fc.power_law_range = f.power_law_exponent_range.unwrap_or(fc.power_law_range);
    fc.seed = f.seed;

    if let Some(d) = f.degree_distribution {
        if d != "power_law" {
            return Err(ConfigError::Invalid(format!(
                "degree_distribution {d:?} is not supported (only \"power_law\")"
            )));
        }
    }
    if f.degree_heterogeneity.is_some() {
        config.warnings.push("degree_heterogeneity is accepted but has no effect".into());
    }
    if f.use_dccc_sbm.is_some() {
        config.warnings.push("use_dccc_sbm is accepted but has no effect".into());
    }
    if mode == DatasetMode::Transductive && config.family.graph_count != 1 {
        return Err(ConfigError::Invalid(format!(
            "transductive mode generates exactly one graph, config asks for {}",
            config.family.graph_count
        )));
    }
    config
        .universe
        .validate()
        .and_then(|_| config.family.validate(config.universe.community_count))
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(config)
}
