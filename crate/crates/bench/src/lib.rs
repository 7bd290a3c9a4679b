//! Shared generators for the criterion benches.

use amlnet_core::graph::TransactionGraph;
use amlnet_core::rng;
use rand::Rng;

/// Random sparse graph: a spanning tree plus `extra` arcs.
pub fn random_graph(n: usize, extra: usize, seed: u64) -> TransactionGraph {
    let mut stream = rng::stream_tagged(seed, "bench", &[]);
    let mut edges = Vec::with_capacity(n + extra);
    for v in 1..n as u32 {
        edges.push((stream.random_range(0..v), v));
    }
    for _ in 0..extra {
        let a = stream.random_range(0..n as u32);
        let b = stream.random_range(0..n as u32);
        edges.push((a, b));
    }
    TransactionGraph::from_edges(&edges, vec![1; n], (0..n as u64).collect()).unwrap()
}

/// Random scored nodes with the given illicit prevalence.
pub fn random_scores(n: usize, prevalence: f64, seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut stream = rng::stream_tagged(seed, "bench-scores", &[]);
    let scores = (0..n).map(|_| stream.random()).collect();
    let mut illicit: Vec<bool> = (0..n)
        .map(|_| stream.random::<f64>() < prevalence)
        .collect();
    illicit[0] = true;
    illicit[n - 1] = false;
    (scores, illicit)
}
