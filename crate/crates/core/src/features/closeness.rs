//! Closeness centrality with the component-scaled (Wasserman-Faust) handling
//! of disconnected graphs.

use rayon::prelude::*;

use crate::features::CHUNK;
use crate::graph::TransactionGraph;

/// Per node: `(r-1)/sum_of_distances`, scaled by `(r-1)/(n-1)` where `r` is
/// the number of reachable nodes including the node itself. Isolated nodes
/// score 0.
pub fn closeness(undirected: &TransactionGraph) -> Vec<f64> {
    let n = undirected.num_nodes();
    if n == 0 {
        return Vec::new();
    }
    let nodes: Vec<u32> = (0..n as u32).collect();
    let chunks: Vec<Vec<f64>> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut dist = vec![-1i32; n];
            let mut queue = Vec::with_capacity(n);
            chunk
                .iter()
                .map(|&source| closeness_of(undirected, source, &mut dist, &mut queue))
                .collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

fn closeness_of(g: &TransactionGraph, source: u32, dist: &mut [i32], queue: &mut Vec<u32>) -> f64 {
    let n = g.num_nodes();
    queue.clear();
    queue.push(source);
    dist[source as usize] = 0;
    let mut head = 0;
    let mut sum = 0i64;
    let mut reached = 1i64;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        let dv = dist[v as usize];
        for &w in g.neighbors(v) {
            if dist[w as usize] < 0 {
                dist[w as usize] = dv + 1;
                sum += (dv + 1) as i64;
                reached += 1;
                queue.push(w);
            }
        }
    }
    for &v in queue.iter() {
        dist[v as usize] = -1;
    }
    if reached <= 1 || n <= 1 || sum == 0 {
        return 0.0;
    }
    let r = (reached - 1) as f64;
    (r / sum as f64) * (r / (n - 1) as f64)
}
