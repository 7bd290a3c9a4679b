//! Random walk samplers on the undirected view.
//!
//! DeepWalk steps uniformly over neighbors. node2vec biases the step by the
//! distance between the previous node `t` and the candidate `x`: weight 1/p
//! when `x == t`, 1 when `x` is adjacent to `t`, 1/q otherwise. Walks
//! truncate at dead ends.

use rand::Rng;

use crate::embed::{WalkConfig, WalkKind};
use crate::graph::TransactionGraph;
use crate::rng;

/// Uniform next-neighbor walk of at most `length` nodes (start included).
pub fn sample_walk_deepwalk(
    undirected: &TransactionGraph,
    start: u32,
    length: usize,
    rng: &mut impl Rng,
) -> Vec<u32> {
    assert!(length >= 1, "walk length must be at least 1");
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut current = start;
    while walk.len() < length {
        let neighbors = undirected.neighbors(current);
        if neighbors.is_empty() {
            break;
        }
        current = neighbors[rng.random_range(0..neighbors.len())];
        walk.push(current);
    }
    walk
}

/// Second-order biased walk; the first step is uniform.
pub fn sample_walk_node2vec(
    undirected: &TransactionGraph,
    start: u32,
    length: usize,
    p: f64,
    q: f64,
    rng: &mut impl Rng,
) -> Vec<u32> {
    assert!(length >= 1, "walk length must be at least 1");
    assert!(p > 0.0 && q > 0.0, "p and q must be positive");
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    if length == 1 {
        return walk;
    }
    let first = {
        let neighbors = undirected.neighbors(start);
        if neighbors.is_empty() {
            return walk;
        }
        neighbors[rng.random_range(0..neighbors.len())]
    };
    walk.push(first);
    let mut prev = start;
    let mut current = first;
    while walk.len() < length {
        match node2vec_next(undirected, prev, current, p, q, rng) {
            Some(next) => {
                walk.push(next);
                prev = current;
                current = next;
            }
            None => break,
        }
    }
    walk
}

/// One biased step from `current` given the previous node.
pub fn node2vec_next(
    undirected: &TransactionGraph,
    prev: u32,
    current: u32,
    p: f64,
    q: f64,
    rng: &mut impl Rng,
) -> Option<u32> {
    let neighbors = undirected.neighbors(current);
    if neighbors.is_empty() {
        return None;
    }
    let prev_neighbors = undirected.neighbors(prev);
    let weight = |x: u32| -> f64 {
        if x == prev {
            1.0 / p
        } else if prev_neighbors.binary_search(&x).is_ok() {
            1.0
        } else {
            1.0 / q
        }
    };
    let total: f64 = neighbors.iter().map(|&x| weight(x)).sum();
    let mut draw = rng.random::<f64>() * total;
    for &x in neighbors {
        draw -= weight(x);
        if draw <= 0.0 {
            return Some(x);
        }
    }
    Some(*neighbors.last().expect("non-empty neighbors"))
}

/// Normalized transition distribution for a (prev, current) state; the exact
/// probabilities the sampler draws from.
pub fn node2vec_step_distribution(
    undirected: &TransactionGraph,
    prev: u32,
    current: u32,
    p: f64,
    q: f64,
) -> Vec<(u32, f64)> {
    let neighbors = undirected.neighbors(current);
    let prev_neighbors = undirected.neighbors(prev);
    let weights: Vec<f64> = neighbors
        .iter()
        .map(|&x| {
            if x == prev {
                1.0 / p
            } else if prev_neighbors.binary_search(&x).is_ok() {
                1.0
            } else {
                1.0 / q
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    neighbors
        .iter()
        .zip(weights)
        .map(|(&x, w)| (x, w / total))
        .collect()
}

/// Generates `walks_per_node` walks from every node, in node-major order.
/// Every walk draws from its own `(seed, node, walk index)` stream, so the
/// corpus is reproducible and independent of scheduling.
pub fn generate_corpus(
    undirected: &TransactionGraph,
    kind: WalkKind,
    cfg: &WalkConfig,
) -> Vec<Vec<u32>> {
    let n = undirected.num_nodes();
    let mut corpus = Vec::with_capacity(n * cfg.walks_per_node);
    for node in 0..n as u32 {
        for walk_idx in 0..cfg.walks_per_node {
            let mut stream =
                rng::stream_tagged(cfg.seed, "walk", &[u64::from(node), walk_idx as u64]);
            let walk = match kind {
                WalkKind::DeepWalk => {
                    sample_walk_deepwalk(undirected, node, cfg.walk_length, &mut stream)
                }
                WalkKind::Node2vec => sample_walk_node2vec(
                    undirected,
                    node,
                    cfg.walk_length,
                    cfg.p,
                    cfg.q,
                    &mut stream,
                ),
            };
            corpus.push(walk);
        }
    }
    corpus
}
