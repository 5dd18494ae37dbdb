//! Dataset persistence and configuration files.

pub mod canonical;
pub mod config;
pub mod dataset;

pub use canonical::{to_canonical_vec, write_canonical};
pub use config::{parse_config, ConfigError, ConfigFormat, GeneratorConfig};
pub use dataset::{
    dataset_files, read_dataset, read_manifest, sha256_hex, write_dataset, Dataset, DatasetError, DatasetMode,
    Manifest,
};
