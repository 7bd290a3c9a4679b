//! Synthetic Elliptic-format fixtures for tests and demos.
//!
//! Mirrors the public layout: per-step disconnected components, sparse
//! labels, 94 local plus 72 aggregated feature columns where the leading
//! local columns carry a class signal so decoders have something to learn.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{AGGREGATED_FEATURES, LOCAL_FEATURES};
use crate::rng;

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub steps: u16,
    pub nodes_per_step: usize,
    /// Probability a node carries a label.
    pub labelled_fraction: f64,
    /// Probability a labelled node is illicit.
    pub illicit_fraction: f64,
    /// Expected intra-step edges per node.
    pub edges_per_node: f64,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            steps: 49,
            nodes_per_step: 24,
            labelled_fraction: 0.7,
            illicit_fraction: 0.25,
            edges_per_node: 1.4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub features: PathBuf,
    pub classes: PathBuf,
    pub edgelist: PathBuf,
}

/// Writes the three CSVs under `dir` using the canonical Elliptic filenames.
pub fn write_fixture(dir: &Path, cfg: &FixtureConfig) -> Result<FixturePaths> {
    assert!(cfg.steps >= 1 && cfg.steps <= 49, "steps in 1..=49");
    assert!(cfg.nodes_per_step >= 2, "at least two nodes per step");
    let mut rng = rng::stream_tagged(cfg.seed, "fixture", &[]);

    let mut features = String::new();
    let mut classes = String::from("txId,class\n");
    let mut edges = String::from("txId1,txId2\n");

    for step in 1..=cfg.steps {
        let ids: Vec<u64> = (0..cfg.nodes_per_step)
            .map(|i| u64::from(step) * 1_000_000 + i as u64 * 7 + 3)
            .collect();
        for (i, &id) in ids.iter().enumerate() {
            let illicit = if i == 0 {
                true
            } else if i == 1 {
                false
            } else {
                rng.random::<f64>() < cfg.illicit_fraction
            };
            // The first two nodes of every step stay labelled so every split
            // keeps both classes.
            let labelled = i < 2 || rng.random::<f64>() < cfg.labelled_fraction;

            let signal = if illicit { 1.0 } else { -1.0 };
            let _ = write!(features, "{},{}", id, step);
            for c in 0..LOCAL_FEATURES {
                let strength = if c < 8 { 1.0 / (1.0 + c as f64) } else { 0.0 };
                let value = signal * strength + rng.random_range(-0.5..0.5);
                let _ = write!(features, ",{:.6}", value);
            }
            for c in 0..AGGREGATED_FEATURES {
                let strength = if c < 4 { 0.3 } else { 0.0 };
                let value = signal * strength + rng.random_range(-0.5..0.5);
                let _ = write!(features, ",{:.6}", value);
            }
            features.push('\n');

            let token = if !labelled {
                "unknown"
            } else if illicit {
                "1"
            } else {
                "2"
            };
            let _ = writeln!(classes, "{},{}", id, token);
        }

        // Intra-step edges only, matching the disconnected period structure.
        let edge_count = (cfg.nodes_per_step as f64 * cfg.edges_per_node) as usize;
        for _ in 0..edge_count {
            let a = rng.random_range(0..ids.len());
            let b = rng.random_range(0..ids.len());
            if a != b {
                let _ = writeln!(edges, "{},{}", ids[a], ids[b]);
            }
        }
        // Keep every node reachable within its step.
        for i in 1..ids.len() {
            let parent = rng.random_range(0..i);
            let _ = writeln!(edges, "{},{}", ids[parent], ids[i]);
        }
    }

    let paths = FixturePaths {
        features: dir.join("elliptic_txs_features.csv"),
        classes: dir.join("elliptic_txs_classes.csv"),
        edgelist: dir.join("elliptic_txs_edgelist.csv"),
    };
    std::fs::write(&paths.features, features).map_err(|e| Error::io(&paths.features, e))?;
    std::fs::write(&paths.classes, classes).map_err(|e| Error::io(&paths.classes, e))?;
    std::fs::write(&paths.edgelist, edges).map_err(|e| Error::io(&paths.edgelist, e))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_elliptic, make_splits, Label};

    #[test]
    fn fixture_loads_and_splits_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = FixtureConfig {
            steps: 49,
            nodes_per_step: 6,
            seed: 3,
            ..FixtureConfig::default()
        };
        let paths = write_fixture(dir.path(), &cfg).unwrap();
        let (graph, table) =
            load_elliptic(&paths.features, &paths.classes, &paths.edgelist).unwrap();
        assert_eq!(graph.num_nodes(), 49 * 6);
        let (masks, counts) = make_splits(&graph, &table).unwrap();
        assert!(counts.train_labelled > 0);
        assert!(counts.val_labelled > 0);
        assert!(counts.test_labelled > 0);
        // Both classes present in the test window.
        let mut illicit = 0;
        let mut licit = 0;
        for v in 0..graph.num_nodes() {
            if masks.test[v] {
                match table.labels[v] {
                    Label::Illicit => illicit += 1,
                    Label::Licit => licit += 1,
                    Label::Unknown => {}
                }
            }
        }
        assert!(illicit > 0 && licit > 0);
    }

    #[test]
    fn fixture_is_deterministic() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let cfg = FixtureConfig {
            steps: 3,
            nodes_per_step: 5,
            seed: 11,
            ..FixtureConfig::default()
        };
        let a = write_fixture(dir_a.path(), &cfg).unwrap();
        let b = write_fixture(dir_b.path(), &cfg).unwrap();
        assert_eq!(
            std::fs::read_to_string(&a.features).unwrap(),
            std::fs::read_to_string(&b.features).unwrap()
        );
        assert_eq!(
            std::fs::read_to_string(&a.edgelist).unwrap(),
            std::fs::read_to_string(&b.edgelist).unwrap()
        );
    }
}
