//! Manually engineered network features: egonet density with neighbor
//! summary statistics, betweenness, closeness, eigenvector centrality and
//! PageRank.
//!
//! All features except PageRank are computed on the undirected simple view;
//! PageRank runs on the directed graph since transaction flow is directional.

mod betweenness;
mod closeness;
mod spectral;

pub use betweenness::betweenness;
pub use closeness::closeness;
pub use spectral::{eigenvector_centrality, pagerank};

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::TransactionGraph;

/// Fixed export column order.
pub const MANUAL_FEATURE_COLUMNS: [&str; 8] = [
    "density",
    "density_min",
    "density_mean",
    "density_max",
    "betweenness",
    "closeness",
    "eigenvector",
    "pagerank",
];

/// Work-chunk width for parallel per-source computations. Partial results
/// are reduced in chunk order, so outputs do not depend on the thread count.
pub(crate) const CHUNK: usize = 64;

#[derive(Debug, Clone)]
pub struct ManualFeatureConfig {
    /// Betweenness pivot count; any value >= the node count selects exact
    /// Brandes over all sources.
    pub betweenness_samples: usize,
    pub seed: u64,
    /// Random jump (teleport) probability for PageRank.
    pub pagerank_alpha: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Compute every feature on the per-time-step induced subgraph instead
    /// of the full graph.
    pub per_period: bool,
}

impl Default for ManualFeatureConfig {
    fn default() -> Self {
        ManualFeatureConfig {
            betweenness_samples: 2_000,
            seed: 0,
            pagerank_alpha: 0.593,
            tolerance: 1e-8,
            // Disconnected graphs with near-degenerate dominant eigenvalues
            // (one component per time step) converge slowly; the budget is
            // sized so the iteration count is never the binding constraint.
            max_iterations: 200_000,
            per_period: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ManualFeatureSet {
    pub density: Vec<f64>,
    pub density_min: Vec<f64>,
    pub density_mean: Vec<f64>,
    pub density_max: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
    pub eigenvector: Vec<f64>,
    pub pagerank: Vec<f64>,
}

impl ManualFeatureSet {
    pub fn num_nodes(&self) -> usize {
        self.density.len()
    }

    /// Dense n x 8 matrix in export column order.
    pub fn to_matrix(&self) -> Array2<f64> {
        let n = self.num_nodes();
        let mut out = Array2::zeros((n, 8));
        let columns = [
            &self.density,
            &self.density_min,
            &self.density_mean,
            &self.density_max,
            &self.betweenness,
            &self.closeness,
            &self.eigenvector,
            &self.pagerank,
        ];
        for (c, col) in columns.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.to_matrix().iter().all(|v| v.is_finite())
    }

    /// `node_id,density,...,pagerank` rows keyed by external ids.
    pub fn write_csv(&self, path: &Path, external_ids: &[u64]) -> Result<()> {
        let mut out = String::from("node_id,density,density_min,density_mean,density_max,betweenness,closeness,eigenvector,pagerank\n");
        for v in 0..self.num_nodes() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                external_ids[v],
                self.density[v],
                self.density_min[v],
                self.density_mean[v],
                self.density_max[v],
                self.betweenness[v],
                self.closeness[v],
                self.eigenvector[v],
                self.pagerank[v]
            );
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Computes the full feature table. `directed` drives PageRank, `undirected`
/// everything else; both views must describe the same node set.
pub fn compute_manual_features(
    directed: &TransactionGraph,
    undirected: &TransactionGraph,
    cfg: &ManualFeatureConfig,
) -> Result<ManualFeatureSet> {
    assert_eq!(directed.num_nodes(), undirected.num_nodes());
    if cfg.per_period {
        return compute_per_period(directed, cfg);
    }
    let density = egonet_densities(undirected);
    let (density_min, density_mean, density_max) = neighbor_density_stats(undirected, &density);
    let betweenness = betweenness(undirected, cfg.betweenness_samples, cfg.seed);
    let closeness = closeness(undirected);
    let eigenvector = eigenvector_centrality(undirected, cfg.tolerance, cfg.max_iterations)?;
    let pagerank = pagerank(
        directed,
        cfg.pagerank_alpha,
        cfg.tolerance,
        cfg.max_iterations,
    )?;
    let set = ManualFeatureSet {
        density,
        density_min,
        density_mean,
        density_max,
        betweenness,
        closeness,
        eigenvector,
        pagerank,
    };
    if !set.all_finite() {
        return Err(Error::Config("non-finite manual feature value".into()));
    }
    Ok(set)
}

/// Per-period variant: every feature is computed on the time step's induced
/// subgraph and scattered back to the global node order.
fn compute_per_period(
    directed: &TransactionGraph,
    cfg: &ManualFeatureConfig,
) -> Result<ManualFeatureSet> {
    let n = directed.num_nodes();
    let mut by_step: std::collections::BTreeMap<u16, Vec<u32>> = std::collections::BTreeMap::new();
    for v in 0..n as u32 {
        by_step.entry(directed.time_step(v)).or_default().push(v);
    }

    let mut merged = ManualFeatureSet {
        density: vec![0.0; n],
        density_min: vec![0.0; n],
        density_mean: vec![0.0; n],
        density_max: vec![0.0; n],
        betweenness: vec![0.0; n],
        closeness: vec![0.0; n],
        eigenvector: vec![0.0; n],
        pagerank: vec![0.0; n],
    };
    let sub_cfg = ManualFeatureConfig {
        per_period: false,
        ..cfg.clone()
    };
    for nodes in by_step.values() {
        let sub = induced_subgraph(directed, nodes);
        let sub_undirected = sub.undirected_view();
        let part = compute_manual_features(&sub, &sub_undirected, &sub_cfg)?;
        for (local, &global) in nodes.iter().enumerate() {
            let g = global as usize;
            merged.density[g] = part.density[local];
            merged.density_min[g] = part.density_min[local];
            merged.density_mean[g] = part.density_mean[local];
            merged.density_max[g] = part.density_max[local];
            merged.betweenness[g] = part.betweenness[local];
            merged.closeness[g] = part.closeness[local];
            merged.eigenvector[g] = part.eigenvector[local];
            merged.pagerank[g] = part.pagerank[local];
        }
    }
    Ok(merged)
}

/// Directed induced subgraph over `nodes` (sorted dense indices).
fn induced_subgraph(graph: &TransactionGraph, nodes: &[u32]) -> TransactionGraph {
    let mut local_of = std::collections::HashMap::with_capacity(nodes.len());
    for (local, &global) in nodes.iter().enumerate() {
        local_of.insert(global, local as u32);
    }
    let mut edges = Vec::new();
    for (local, &global) in nodes.iter().enumerate() {
        for &t in graph.out_neighbors(global) {
            if let Some(&lt) = local_of.get(&t) {
                edges.push((local as u32, lt));
            }
        }
    }
    let time_steps = nodes.iter().map(|&v| graph.time_step(v)).collect();
    let external = nodes.iter().map(|&v| graph.external_id(v)).collect();
    TransactionGraph::from_edges(&edges, time_steps, external).expect("unique ids from parent")
}

/// Egonet density of one node: edges within the ego set over the maximal
/// number possible. Isolated nodes score 0 by convention.
pub fn egonet_density(undirected: &TransactionGraph, node: u32) -> f64 {
    let mut marked = vec![false; undirected.num_nodes()];
    density_with_marks(undirected, node, &mut marked)
}

/// Egonet density of every node, parallel over node chunks.
pub fn egonet_densities(undirected: &TransactionGraph) -> Vec<f64> {
    let n = undirected.num_nodes();
    let chunks: Vec<Vec<f64>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|nodes| {
            let mut marked = vec![false; n];
            nodes
                .iter()
                .map(|&v| density_with_marks(undirected, v as u32, &mut marked))
                .collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

fn density_with_marks(g: &TransactionGraph, node: u32, marked: &mut [bool]) -> f64 {
    let neighbors = g.neighbors(node);
    let degree = neighbors.len();
    if degree == 0 {
        return 0.0;
    }
    marked[node as usize] = true;
    for &u in neighbors {
        marked[u as usize] = true;
    }
    // Each ego edge is seen from both endpoints.
    let mut twice_edges = 0usize;
    twice_edges += g
        .neighbors(node)
        .iter()
        .filter(|&&u| marked[u as usize])
        .count();
    for &u in neighbors {
        twice_edges += g
            .neighbors(u)
            .iter()
            .filter(|&&w| marked[w as usize])
            .count();
    }
    marked[node as usize] = false;
    for &u in neighbors {
        marked[u as usize] = false;
    }
    let ego = degree + 1;
    let max_edges = ego * (ego - 1) / 2;
    (twice_edges as f64 / 2.0) / max_edges as f64
}

/// Minimum, mean and maximum of the densities of each node's direct
/// neighbors; all three are 0 for isolated nodes.
pub fn neighbor_density_stats(
    undirected: &TransactionGraph,
    densities: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = undirected.num_nodes();
    let mut mins = vec![0.0; n];
    let mut means = vec![0.0; n];
    let mut maxs = vec![0.0; n];
    for v in 0..n {
        let neighbors = undirected.neighbors(v as u32);
        if neighbors.is_empty() {
            continue;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &u in neighbors {
            let d = densities[u as usize];
            lo = lo.min(d);
            hi = hi.max(d);
            sum += d;
        }
        mins[v] = lo;
        maxs[v] = hi;
        means[v] = sum / neighbors.len() as f64;
    }
    (mins, means, maxs)
}

#[cfg(test)]
pub(crate) fn graph_from_edges(n: usize, edges: &[(u32, u32)]) -> TransactionGraph {
    use std::collections::HashMap;
    let external: Vec<u64> = (0..n as u64).collect();
    let index: HashMap<u64, u32> = external.iter().map(|&e| (e, e as u32)).collect();
    TransactionGraph::from_parts(edges, vec![1; n], external, index)
}
