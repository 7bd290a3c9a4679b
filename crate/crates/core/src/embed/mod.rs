//! Shallow representation learning: DeepWalk and node2vec random walks with
//! skip-gram negative-sampling embeddings.

mod skipgram;
mod walks;

pub use skipgram::{skipgram_epoch_losses, train_skipgram};
pub use walks::{
    generate_corpus, node2vec_next, node2vec_step_distribution, sample_walk_deepwalk,
    sample_walk_node2vec,
};

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    DeepWalk,
    Node2vec,
}

impl std::fmt::Display for WalkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WalkKind::DeepWalk => write!(f, "deepwalk"),
            WalkKind::Node2vec => write!(f, "node2vec"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub latent_dim: usize,
    /// Return parameter; only read by node2vec walks.
    pub p: f64,
    /// In-out parameter; only read by node2vec walks.
    pub q: f64,
    pub negatives_per_positive: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 1,
            walk_length: 9,
            window: 5,
            latent_dim: 47,
            p: 1.0,
            q: 1.0,
            negatives_per_positive: 1,
            epochs: 5,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

/// Trained node embeddings (the skip-gram input matrix).
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub method: WalkKind,
    pub vectors: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn num_nodes(&self) -> usize {
        self.vectors.dim().0
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim().1
    }

    /// `node_id,e0,...,e{d-1}` rows keyed by external ids.
    pub fn write_csv(&self, path: &Path, external_ids: &[u64]) -> Result<()> {
        let mut out = String::from("node_id");
        for d in 0..self.dim() {
            let _ = write!(out, ",e{}", d);
        }
        out.push('\n');
        for (v, row) in self.vectors.rows().into_iter().enumerate() {
            let _ = write!(out, "{}", external_ids[v]);
            for value in row {
                let _ = write!(out, ",{}", value);
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Dumps a walk corpus as whitespace-separated external-id lines.
pub fn write_walks(path: &Path, walks: &[Vec<u32>], external_ids: &[u64]) -> Result<()> {
    let mut out = String::new();
    for walk in walks {
        let line: Vec<String> = walk
            .iter()
            .map(|&v| external_ids[v as usize].to_string())
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
