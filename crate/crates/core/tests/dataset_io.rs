use std::fs;
use std::sync::atomic::AtomicUsize;

use graphfam::io::{read_dataset, read_manifest, write_dataset, DatasetError, DatasetMode};
use graphfam::pipeline::generate_dataset;
use graphfam::{FamilyConfig, UniverseConfig};

fn small_dataset(mode: DatasetMode) -> graphfam::io::Dataset {
    let family = FamilyConfig {
        graph_count: if mode == DatasetMode::Inductive { 20 } else { 1 },
        node_range: (40, 80),
        ..Default::default()
    };
    generate_dataset(&UniverseConfig::default(), &family, mode, &AtomicUsize::new(0))
        .unwrap()
        .dataset
}

#[test]
fn round_trip_is_lossless() {
    for mode in [DatasetMode::Inductive, DatasetMode::Transductive] {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(mode);
        let manifest = write_dataset(dir.path(), &dataset, false).unwrap();
        assert_eq!(manifest.graph_count, dataset.instances.len());
        let back = read_dataset(dir.path(), true).unwrap();
        assert_eq!(back, dataset);
        // Rewriting what was read gives identical bytes.
        let again = tempfile::tempdir().unwrap();
        write_dataset(again.path(), &back, false).unwrap();
        for name in ["manifest.json", "universe.json", "family.json", "graphs.jsonl", "splits.json"] {
            assert_eq!(
                fs::read(dir.path().join(name)).unwrap(),
                fs::read(again.path().join(name)).unwrap(),
                "{name}"
            );
        }
    }
}

#[test]
fn existing_dataset_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = small_dataset(DatasetMode::Transductive);
    write_dataset(dir.path(), &dataset, false).unwrap();
    assert!(matches!(
        write_dataset(dir.path(), &dataset, false),
        Err(DatasetError::AlreadyExists(_))
    ));
    write_dataset(dir.path(), &dataset, true).unwrap();
}

#[test]
fn tampered_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &small_dataset(DatasetMode::Inductive), false).unwrap();
    let path = dir.path().join("splits.json");
    let text = fs::read_to_string(&path).unwrap();
    // Still valid JSON, different bytes.
    fs::write(&path, text.replacen("\"train\":[", "\"train\": [", 1)).unwrap();
    match read_dataset(dir.path(), false) {
        Err(DatasetError::HashMismatch { file, .. }) => assert_eq!(file, "splits.json"),
        other => panic!("expected hash mismatch, got {other:?}"),
    }
}

#[test]
fn truncated_graphs_report_line() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &small_dataset(DatasetMode::Inductive), false).unwrap();
    let path = dir.path().join("graphs.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut = lines[..4].join("\n").len() + 1 + lines[4].len() / 2;
    fs::write(&path, &text[..cut]).unwrap();
    match read_dataset(dir.path(), false) {
        Err(DatasetError::Parse { file, line, .. }) => {
            assert_eq!(file, "graphs.jsonl");
            assert_eq!(line, 5);
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn unknown_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &small_dataset(DatasetMode::Transductive), false).unwrap();
    let path = dir.path().join("manifest.json");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replacen("\"format_version\":1", "\"format_version\":99", 1)).unwrap();
    assert!(matches!(
        read_manifest(dir.path()),
        Err(DatasetError::UnsupportedVersion { version: 99, .. })
    ));
    assert!(matches!(
        read_dataset(dir.path(), true),
        Err(DatasetError::UnsupportedVersion { .. })
    ));
}

#[test]
fn invariant_violation_is_caught_when_validating() {
    let dir = tempfile::tempdir().unwrap();
    let mut dataset = small_dataset(DatasetMode::Inductive);
    // A self-loop breaks the edge invariants but is still well-formed JSON.
    dataset.instances[3].edges.insert(0, [0, 0]);
    write_dataset(dir.path(), &dataset, false).unwrap();
    assert!(read_dataset(dir.path(), false).is_ok());
    assert!(matches!(
        read_dataset(dir.path(), true),
        Err(DatasetError::Invariant { .. })
    ));
}
