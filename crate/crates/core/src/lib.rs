//! Network-analytics methods for anti-money-laundering node classification.
//!
//! The crate covers the full experimental stack for benchmarking illicit-node
//! detection on Elliptic-format transaction graphs:
//!
//! - [`graph`]: CSV ingestion into an immutable CSR transaction graph with
//!   temporal train/validation/test splits.
//! - [`features`]: manually engineered network features (egonet density,
//!   betweenness, closeness, eigenvector centrality, PageRank).
//! - [`embed`]: DeepWalk and node2vec random walks with skip-gram
//!   negative-sampling embeddings.
//! - [`nn`]: a minimal dense-tensor reverse-mode autodiff engine, the Adam
//!   optimizer and the MLP decoder used for tabular feature sets.
//! - [`gnn`]: GCN, GraphSAGE, GATv2 and GIN trained end-to-end on masked
//!   node labels.
//! - [`eval`]: AUC-ROC, AUC-PR, top-k% threshold metrics and variance
//!   estimation via bootstrap or test-mask halving.
//! - [`tune`]: hyperparameter search (seeded random or a lightweight
//!   tree-structured estimator) over the per-method search spaces.

#![deny(unsafe_code)]

pub mod embed;
pub mod error;
pub mod eval;
pub mod features;
pub mod fixture;
pub mod gnn;
pub mod graph;
pub mod kvfile;
pub mod method;
pub mod nn;
pub mod rng;
#[cfg(test)]
pub(crate) mod testutil;
pub mod tune;

pub use error::{Error, Result};
pub use method::Method;
