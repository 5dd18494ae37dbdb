//! Dataset directories.
//!
//! ```text
//! manifest.json   format id and version, RNG id, universe hash, SHA-256 per file
//! universe.json   Universe
//! family.json     FamilyConfig
//! graphs.jsonl    one graph per line, in index order
//! splits.json     Splits
//! ```
//!
//! Every file is canonical JSON, so the same inputs give the same bytes.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::canonical::{to_canonical_vec, write_canonical};
use crate::rng::RNG_ALGORITHM;
use crate::tasks::{community_labels, triangle_count, Splits};
use crate::types::{FamilyConfig, GraphInstance, Universe};

pub const FORMAT: &str = "graphfam-jsonl";
pub const FORMAT_VERSION: u32 = 1;

pub const MANIFEST: &str = "manifest.json";
pub const UNIVERSE: &str = "universe.json";
pub const FAMILY: &str = "family.json";
pub const GRAPHS: &str = "graphs.jsonl";
pub const SPLITS: &str = "splits.json";

/// Files covered by the manifest, in manifest order.
pub const DATA_FILES: [&str; 4] = [UNIVERSE, FAMILY, GRAPHS, SPLITS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetMode {
    /// Many graphs, graph-level splits.
    Inductive,
    /// One graph, node-level splits.
    Transductive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub mode: DatasetMode,
    pub universe: Universe,
    pub family: FamilyConfig,
    pub instances: Vec<GraphInstance>,
    pub splits: Splits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub format_version: u32,
    pub rng_algorithm: String,
    pub mode: DatasetMode,
    pub graph_count: usize,
    /// SHA-256 of `universe.json`.
    pub universe_hash: String,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} already holds a dataset (use --force to overwrite)")]
    AlreadyExists(PathBuf),
    #[error("unsupported dataset format {format:?} version {version} (this build reads {FORMAT:?} version {FORMAT_VERSION})")]
    UnsupportedVersion { format: String, version: u32 },
    #[error("{file}: content hash mismatch (manifest {expected}, file {actual})")]
    HashMismatch {
        file: String,
        expected: String,
        actual: String,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("graph {graph_index}: {message}")]
    Invariant { graph_index: usize, message: String },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One line of `graphs.jsonl`: the instance plus its task labels.
#[derive(Serialize, Deserialize)]
struct GraphLine {
    #[serde(flatten)]
    graph: GraphInstance,
    triangle_count: u64,
    community_labels: Vec<usize>,
}

#[derive(Serialize)]
struct GraphLineRef<'a> {
    #[serde(flatten)]
    graph: &'a GraphInstance,
    triangle_count: u64,
    community_labels: Vec<usize>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialized contents of every data file, in [`DATA_FILES`] order.
pub fn encode_files(dataset: &Dataset) -> Result<Vec<(&'static str, Vec<u8>)>, DatasetError> {
    let mut graphs = Vec::new();
    for g in &dataset.instances {
        let line = GraphLineRef {
            graph: g,
            triangle_count: triangle_count(g),
            community_labels: community_labels(g),
        };
        write_canonical(&mut graphs, &line)?;
        graphs.push(b'\n');
    }
    Ok(vec![
        (UNIVERSE, to_canonical_vec(&dataset.universe)?),
        (FAMILY, to_canonical_vec(&dataset.family)?),
        (GRAPHS, graphs),
        (SPLITS, to_canonical_vec(&dataset.splits)?),
    ])
}

pub fn build_manifest(dataset: &Dataset, files: &[(&'static str, Vec<u8>)]) -> Manifest {
    Manifest {
        format: FORMAT.into(),
        format_version: FORMAT_VERSION,
        rng_algorithm: RNG_ALGORITHM.into(),
        mode: dataset.mode,
        graph_count: dataset.instances.len(),
        universe_hash: sha256_hex(&files[0].1),
        files: files
            .iter()
            .map(|(name, bytes)| FileEntry {
                name: name.to_string(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            })
            .collect(),
    }
}

/// Every file of the dataset, manifest first, as `(name, bytes)`.
pub fn dataset_files(dataset: &Dataset) -> Result<Vec<(&'static str, Vec<u8>)>, DatasetError> {
    let files = encode_files(dataset)?;
    let manifest = to_canonical_vec(&build_manifest(dataset, &files))?;
    let mut all = vec![(MANIFEST, manifest)];
    all.extend(files);
    Ok(all)
}

/// Writes the dataset into `dir`, creating it if needed. A directory that
/// already has a manifest is only replaced when `force` is set.
pub fn write_dataset(dir: &Path, dataset: &Dataset, force: bool) -> Result<Manifest, DatasetError> {
    if dir.join(MANIFEST).exists() && !force {
        return Err(DatasetError::AlreadyExists(dir.to_path_buf()));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = encode_files(dataset)?;
    let manifest = build_manifest(dataset, &files);
    for (name, bytes) in &files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    let path = dir.join(MANIFEST);
    let mut out = fs::File::create(&path).map_err(io_err(&path))?;
    out.write_all(&to_canonical_vec(&manifest)?).map_err(io_err(&path))?;
    Ok(manifest)
}

fn parse_json<T: for<'de> Deserialize<'de>>(file: &str, bytes: &[u8]) -> Result<T, DatasetError> {
    serde_json::from_slice(bytes).map_err(|e| DatasetError::Parse {
        file: file.into(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, DatasetError> {
    let path = dir.join(MANIFEST);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    // Look at the version before the full schema so old or future layouts get
    // the version error rather than a parse error.
    #[derive(Deserialize)]
    struct Head {
        format: String,
        format_version: u32,
    }
    let head: Head = parse_json(MANIFEST, &bytes)?;
    if head.format != FORMAT || head.format_version != FORMAT_VERSION {
        return Err(DatasetError::UnsupportedVersion {
            format: head.format,
            version: head.format_version,
        });
    }
    parse_json(MANIFEST, &bytes)
}

/// Loads a dataset. Parsing happens before the hash check so that broken
/// files report a line number; `validate` then checks every graph invariant
/// and the stored labels.
pub fn read_dataset(dir: &Path, validate: bool) -> Result<Dataset, DatasetError> {
    let manifest = read_manifest(dir)?;
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read(&path).map_err(io_err(&path))
    };
    let universe_bytes = read(UNIVERSE)?;
    let family_bytes = read(FAMILY)?;
    let splits_bytes = read(SPLITS)?;
    let graphs_bytes = read(GRAPHS)?;

    let universe: Universe = parse_json(UNIVERSE, &universe_bytes)?;
    let family: FamilyConfig = parse_json(FAMILY, &family_bytes)?;
    let splits: Splits = parse_json(SPLITS, &splits_bytes)?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(&graphs_bytes[..]).lines().enumerate() {
        let line = line.map_err(io_err(&dir.join(GRAPHS)))?;
        let parsed: GraphLine = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            file: GRAPHS.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        lines.push(parsed);
    }

    for (name, bytes) in [
        (UNIVERSE, &universe_bytes),
        (FAMILY, &family_bytes),
        (GRAPHS, &graphs_bytes),
        (SPLITS, &splits_bytes),
    ] {
        let expected = manifest
            .files
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.sha256.clone())
            .unwrap_or_default();
        let actual = sha256_hex(bytes);
        if expected != actual {
            return Err(DatasetError::HashMismatch {
                file: name.into(),
                expected,
                actual,
            });
        }
    }
    if lines.len() != manifest.graph_count {
        return Err(DatasetError::Parse {
            file: GRAPHS.into(),
            line: lines.len(),
            message: format!("expected {} graphs, found {}", manifest.graph_count, lines.len()),
        });
    }

    if validate {
        for line in &lines {
            let g = &line.graph;
            let fail = |message: String| DatasetError::Invariant {
                graph_index: g.graph_index,
                message,
            };
            g.check_invariants().map_err(fail)?;
            if g.communities.iter().any(|&c| c >= universe.config.community_count) {
                return Err(fail("community id outside the universe".into()));
            }
            if line.community_labels != community_labels(g) {
                return Err(fail("stored community labels disagree with the graph".into()));
            }
            if line.triangle_count != triangle_count(g) {
                return Err(fail("stored triangle count disagrees with the graph".into()));
            }
        }
    }

    Ok(Dataset {
        mode: manifest.mode,
        universe,
        family,
        instances: lines.into_iter().map(|l| l.graph).collect(),
        splits,
    })
}
