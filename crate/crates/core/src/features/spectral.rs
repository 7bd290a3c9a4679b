//! Power-iteration centralities: eigenvector centrality on the undirected
//! view and PageRank on the directed graph.

use crate::error::{Error, Result};
use crate::graph::TransactionGraph;

/// Dominant-eigenvector estimate with unit Euclidean norm and nonnegative
/// entries, starting from the uniform vector.
///
/// Iterates with A + I: the shift leaves the dominant eigenvector unchanged
/// and guarantees convergence on bipartite components where plain power
/// iteration oscillates.
pub fn eigenvector_centrality(
    undirected: &TransactionGraph,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let n = undirected.num_nodes();
    let start = vec![1.0 / (n.max(1) as f64).sqrt(); n];
    eigenvector_centrality_from(undirected, start, tolerance, max_iterations)
}

/// Power iteration from a caller-supplied start vector (entries must be
/// nonnegative and not all zero).
pub fn eigenvector_centrality_from(
    undirected: &TransactionGraph,
    start: Vec<f64>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let n = undirected.num_nodes();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert_eq!(start.len(), n);

    let mut x = start;
    normalize_l2(&mut x);
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iterations {
        for v in 0..n {
            let mut sum = x[v];
            for &u in undirected.neighbors(v as u32) {
                sum += x[u as usize];
            }
            next[v] = sum;
        }
        normalize_l2(&mut next);
        residual = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if residual < tolerance {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        what: "eigenvector centrality",
        iterations: max_iterations,
        residual,
    })
}

fn normalize_l2(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// PageRank with uniform teleportation.
///
/// `alpha` is the random-jump (teleport) probability; dangling-node mass is
/// redistributed uniformly. The result sums to one.
pub fn pagerank(
    directed: &TransactionGraph,
    alpha: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let n = directed.num_nodes();
    pagerank_from(
        directed,
        vec![1.0 / n.max(1) as f64; n],
        alpha,
        tolerance,
        max_iterations,
    )
}

/// PageRank from a caller-supplied probability vector.
pub fn pagerank_from(
    directed: &TransactionGraph,
    start: Vec<f64>,
    alpha: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!(
            "pagerank alpha {} outside [0, 1]",
            alpha
        )));
    }
    let n = directed.num_nodes();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert_eq!(start.len(), n);

    let follow = 1.0 - alpha;
    let mut x = start;
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        x.iter_mut().for_each(|v| *v /= total);
    }
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iterations {
        let dangling: f64 = (0..n)
            .filter(|&v| directed.out_degree(v as u32) == 0)
            .map(|v| x[v])
            .sum();
        let base = alpha / n as f64 + follow * dangling / n as f64;
        next.iter_mut().for_each(|v| *v = base);
        for v in 0..n {
            let out = directed.out_degree(v as u32);
            if out == 0 {
                continue;
            }
            let share = follow * x[v] / out as f64;
            for &w in directed.out_neighbors(v as u32) {
                next[w as usize] += share;
            }
        }
        residual = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if residual < tolerance {
            let sum: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= sum);
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        what: "pagerank",
        iterations: max_iterations,
        residual,
    })
}
