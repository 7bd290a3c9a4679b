//! Betweenness centrality: exact Brandes accumulation, or a pivot-sampled
//! estimate scaled by n/k so that using every node as a pivot reproduces the
//! exact values.
//!
//! Brandes, "A faster algorithm for betweenness centrality", 2001; pivot
//! sampling follows the source-sampling estimator of Brandes and Pich.

use rayon::prelude::*;

use crate::features::CHUNK;
use crate::graph::TransactionGraph;
use crate::rng;

/// Normalized betweenness on an undirected simple graph.
///
/// `sample_count >= num_nodes` selects exact mode (all sources); otherwise
/// `sample_count` distinct pivots are drawn with the given seed. Scores are
/// normalized by (n-1)(n-2)/2 unordered pairs.
pub fn betweenness(undirected: &TransactionGraph, sample_count: usize, seed: u64) -> Vec<f64> {
    let n = undirected.num_nodes();
    if n < 3 {
        return vec![0.0; n];
    }

    let pivots: Vec<u32> = if sample_count >= n {
        (0..n as u32).collect()
    } else {
        let mut rng = rng::stream_tagged(seed, "betweenness-pivots", &[]);
        let mut chosen = rand::seq::index::sample(&mut rng, n, sample_count.max(1)).into_vec();
        chosen.sort_unstable();
        chosen.into_iter().map(|v| v as u32).collect()
    };
    let k = pivots.len();

    let partials: Vec<Vec<f64>> = pivots
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut workspace = Workspace::new(n);
            for &source in chunk {
                accumulate_source(undirected, source, &mut workspace, &mut acc);
            }
            acc
        })
        .collect();

    let mut acc = vec![0.0; n];
    for partial in partials {
        for (a, p) in acc.iter_mut().zip(partial) {
            *a += p;
        }
    }

    // Each unordered pair is counted from both endpoints when every node is
    // a source, hence the missing 1/2 folds into the pair normalization.
    let scale = n as f64 / (k as f64 * ((n - 1) * (n - 2)) as f64);
    acc.iter_mut().for_each(|v| *v *= scale);
    acc
}

struct Workspace {
    sigma: Vec<f64>,
    dist: Vec<i32>,
    delta: Vec<f64>,
    preds: Vec<Vec<u32>>,
    order: Vec<u32>,
    queue: Vec<u32>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            sigma: vec![0.0; n],
            dist: vec![-1; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
            queue: Vec::with_capacity(n),
        }
    }
}

fn accumulate_source(g: &TransactionGraph, source: u32, ws: &mut Workspace, acc: &mut [f64]) {
    // Reset only what the previous source touched.
    for &v in &ws.order {
        ws.sigma[v as usize] = 0.0;
        ws.dist[v as usize] = -1;
        ws.delta[v as usize] = 0.0;
        ws.preds[v as usize].clear();
    }
    ws.order.clear();
    ws.queue.clear();

    ws.sigma[source as usize] = 1.0;
    ws.dist[source as usize] = 0;
    ws.queue.push(source);
    let mut head = 0;
    while head < ws.queue.len() {
        let v = ws.queue[head];
        head += 1;
        ws.order.push(v);
        let dv = ws.dist[v as usize];
        for &w in g.neighbors(v) {
            if ws.dist[w as usize] < 0 {
                ws.dist[w as usize] = dv + 1;
                ws.queue.push(w);
            }
            if ws.dist[w as usize] == dv + 1 {
                ws.sigma[w as usize] += ws.sigma[v as usize];
                ws.preds[w as usize].push(v);
            }
        }
    }

    for &w in ws.order.iter().rev() {
        let coeff = (1.0 + ws.delta[w as usize]) / ws.sigma[w as usize];
        for i in 0..ws.preds[w as usize].len() {
            let v = ws.preds[w as usize][i];
            ws.delta[v as usize] += ws.sigma[v as usize] * coeff;
        }
        if w != source {
            acc[w as usize] += ws.delta[w as usize];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::graph_from_edges;
    use rand::Rng;

    fn undirected(n: usize, edges: &[(u32, u32)]) -> TransactionGraph {
        graph_from_edges(n, edges).undirected_view()
    }

    /// Brute-force oracle: enumerate every shortest path between every pair
    /// by walking the BFS predecessor DAG.
    fn betweenness_oracle(g: &TransactionGraph) -> Vec<f64> {
        let n = g.num_nodes();
        let mut acc = vec![0.0; n];
        for s in 0..n as u32 {
            for t in 0..n as u32 {
                if s >= t {
                    continue;
                }
                let paths = all_shortest_paths(g, s, t);
                if paths.is_empty() {
                    continue;
                }
                let total = paths.len() as f64;
                for path in &paths {
                    for &v in &path[1..path.len() - 1] {
                        acc[v as usize] += 1.0 / total;
                    }
                }
            }
        }
        let norm = ((n - 1) * (n - 2)) as f64 / 2.0;
        acc.iter_mut().for_each(|v| *v /= norm);
        acc
    }

    fn all_shortest_paths(g: &TransactionGraph, s: u32, t: u32) -> Vec<Vec<u32>> {
        let n = g.num_nodes();
        let mut dist = vec![-1i32; n];
        dist[s as usize] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if dist[w as usize] < 0 {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if dist[t as usize] < 0 {
            return Vec::new();
        }
        let mut paths = Vec::new();
        let mut stack = vec![vec![t]];
        while let Some(path) = stack.pop() {
            let head = *path.last().unwrap();
            if head == s {
                let mut p = path.clone();
                p.reverse();
                paths.push(p);
                continue;
            }
            for &w in g.neighbors(head) {
                if dist[w as usize] == dist[head as usize] - 1 {
                    let mut next = path.clone();
                    next.push(w);
                    stack.push(next);
                }
            }
        }
        paths
    }

    #[test]
    fn path_midpoint_has_full_betweenness() {
        let g = undirected(3, &[(0, 1), (1, 2)]);
        let b = betweenness(&g, 3, 0);
        assert!((b[1] - 1.0).abs() < 1e-12);
        assert!(b[0].abs() < 1e-12);
    }

    #[test]
    fn star_center_has_full_betweenness_and_leaves_zero() {
        let g = undirected(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        let b = betweenness(&g, 6, 0);
        assert!((b[0] - 1.0).abs() < 1e-12);
        for v in 1..6 {
            assert_eq!(b[v], 0.0);
        }
    }

    #[test]
    fn exact_mode_matches_path_enumeration_oracle() {
        let mut rng = rng::stream_tagged(5, "betweenness-test", &[]);
        for case in 0..8u64 {
            let n = 8 + (case as usize % 4) * 4;
            let mut edges = Vec::new();
            for a in 0..n as u32 {
                for b in (a + 1)..n as u32 {
                    if rng.random::<f64>() < 0.18 {
                        edges.push((a, b));
                    }
                }
            }
            let g = undirected(n, &edges);
            let fast = betweenness(&g, n, 0);
            let oracle = betweenness_oracle(&g);
            for v in 0..n {
                assert!(
                    (fast[v] - oracle[v]).abs() < 1e-9,
                    "case {} node {}: {} vs {}",
                    case,
                    v,
                    fast[v],
                    oracle[v]
                );
            }
        }
    }

    #[test]
    fn full_pivot_sampling_equals_exact() {
        let mut rng = rng::stream_tagged(9, "betweenness-test", &[1]);
        for case in 0..5u64 {
            let n = 40 + (case as usize) * 30;
            let mut edges = Vec::new();
            for v in 1..n as u32 {
                let parent = rng.random_range(0..v);
                edges.push((parent, v));
                if rng.random::<f64>() < 0.3 {
                    let extra = rng.random_range(0..v);
                    edges.push((extra, v));
                }
            }
            let g = undirected(n, &edges);
            // sample_count == n goes through the same accumulation with every
            // node as a pivot and unit scaling.
            let exact = betweenness(&g, n, 0);
            let sampled = betweenness(&g, n, 12345);
            for v in 0..n {
                assert!((exact[v] - sampled[v]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampled_estimate_tracks_exact_on_average() {
        let mut rng = rng::stream_tagged(13, "betweenness-test", &[2]);
        let n = 120;
        let mut edges = Vec::new();
        for v in 1..n as u32 {
            edges.push((rng.random_range(0..v), v));
        }
        for _ in 0..80 {
            let a = rng.random_range(0..n as u32);
            let b = rng.random_range(0..n as u32);
            if a != b {
                edges.push((a.min(b), a.max(b)));
            }
        }
        let g = undirected(n, &edges);
        let exact = betweenness(&g, n, 0);
        let sampled = betweenness(&g, 60, 7);
        let top_exact: f64 = exact.iter().cloned().fold(0.0, f64::max);
        let err: f64 = exact
            .iter()
            .zip(&sampled)
            .map(|(e, s)| (e - s).abs())
            .fold(0.0, f64::max);
        assert!(err < top_exact.max(0.05), "max abs error {}", err);
    }

    #[test]
    fn tiny_graphs_are_all_zero() {
        let g = undirected(2, &[(0, 1)]);
        assert_eq!(betweenness(&g, 2, 0), vec![0.0, 0.0]);
    }
}
