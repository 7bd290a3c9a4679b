//! Immutable transaction graph with temporal split masks.
//!
//! Nodes are transactions; a directed edge means the output of one
//! transaction is the input of the next. External ids are arbitrary integers
//! mapped to dense 0-based indices in file order; every downstream artifact
//! works on dense indices over cache-friendly CSR arrays.

mod load;

pub use load::{export_edgelist, load_elliptic, DatasetManifest};

use std::collections::HashMap;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Number of local (transaction-specific) feature columns.
pub const LOCAL_FEATURES: usize = 94;
/// Number of aggregated feature columns.
pub const AGGREGATED_FEATURES: usize = 72;
/// Expected column count of the features file: id, time step, 94 local, 72 aggregated.
pub const FEATURE_FILE_COLUMNS: usize = 2 + LOCAL_FEATURES + AGGREGATED_FEATURES;

/// Last time step of the training window (inclusive).
pub const TRAIN_END: u16 = 30;
/// Last time step of the validation window (inclusive).
pub const VAL_END: u16 = 40;
/// Last valid time step.
pub const MAX_TIME_STEP: u16 = 49;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Illicit,
    Licit,
    Unknown,
}

/// Directed transaction graph in compressed adjacency form.
///
/// `num_edges` counts stored arcs: for a loaded directed graph that equals
/// the edge-list rows (duplicates and self-loops preserved); the undirected
/// view stores each deduplicated unordered pair as two arcs.
#[derive(Debug, Clone)]
pub struct TransactionGraph {
    num_nodes: usize,
    num_edges: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_targets: Vec<u32>,
    time_steps: Vec<u16>,
    external_ids: Vec<u64>,
    id_index: HashMap<u64, u32>,
}

impl TransactionGraph {
    /// Builds a graph programmatically (fixtures, tools). `external_ids`
    /// must be unique and aligned with `time_steps`; edge endpoints are
    /// dense indices below the node count.
    pub fn from_edges(
        edges: &[(u32, u32)],
        time_steps: Vec<u16>,
        external_ids: Vec<u64>,
    ) -> Result<Self> {
        if time_steps.len() != external_ids.len() {
            return Err(Error::Config(
                "time_steps and external_ids must have equal length".into(),
            ));
        }
        let mut id_index = HashMap::with_capacity(external_ids.len());
        for (dense, &id) in external_ids.iter().enumerate() {
            if id_index.insert(id, dense as u32).is_some() {
                return Err(Error::Config(format!("duplicate external id {}", id)));
            }
        }
        let n = external_ids.len();
        if edges
            .iter()
            .any(|&(s, t)| s as usize >= n || t as usize >= n)
        {
            return Err(Error::Config("edge endpoint out of range".into()));
        }
        Ok(TransactionGraph::from_parts(
            edges,
            time_steps,
            external_ids,
            id_index,
        ))
    }

    pub(crate) fn from_parts(
        edges: &[(u32, u32)],
        time_steps: Vec<u16>,
        external_ids: Vec<u64>,
        id_index: HashMap<u64, u32>,
    ) -> Self {
        let num_nodes = external_ids.len();
        let (out_offsets, out_targets) = build_csr(num_nodes, edges.iter().copied());
        let (in_offsets, in_targets) = build_csr(num_nodes, edges.iter().map(|&(s, t)| (t, s)));
        TransactionGraph {
            num_nodes,
            num_edges: edges.len(),
            out_offsets,
            out_targets,
            in_offsets,
            in_targets,
            time_steps,
            external_ids,
            id_index,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn out_neighbors(&self, node: u32) -> &[u32] {
        let v = node as usize;
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn in_neighbors(&self, node: u32) -> &[u32] {
        let v = node as usize;
        &self.in_targets[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    /// Neighbors in the symmetric sense; meaningful on the undirected view
    /// where out- and in-adjacency coincide.
    pub fn neighbors(&self, node: u32) -> &[u32] {
        self.out_neighbors(node)
    }

    pub fn out_degree(&self, node: u32) -> usize {
        self.out_neighbors(node).len()
    }

    pub fn time_step(&self, node: u32) -> u16 {
        self.time_steps[node as usize]
    }

    pub fn time_steps(&self) -> &[u16] {
        &self.time_steps
    }

    pub fn external_id(&self, node: u32) -> u64 {
        self.external_ids[node as usize]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.external_ids
    }

    pub fn dense_index(&self, external_id: u64) -> Option<u32> {
        self.id_index.get(&external_id).copied()
    }

    /// All stored arcs as (source, target) dense-index pairs.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.num_nodes as u32)
            .flat_map(move |s| self.out_neighbors(s).iter().map(move |&t| (s, t)))
    }

    /// Symmetric simple view: unordered pairs deduplicated, self-loops removed.
    ///
    /// Per-node neighbor lists come out sorted, which the walk samplers rely
    /// on for adjacency membership tests.
    pub fn undirected_view(&self) -> TransactionGraph {
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(self.num_edges);
        for (s, t) in self.edges() {
            if s == t {
                continue;
            }
            pairs.push((s.min(t), s.max(t)));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut arcs: Vec<(u32, u32)> = Vec::with_capacity(pairs.len() * 2);
        for &(a, b) in &pairs {
            arcs.push((a, b));
            arcs.push((b, a));
        }
        arcs.sort_unstable();

        let (offsets, targets) = build_csr(self.num_nodes, arcs.iter().copied());
        TransactionGraph {
            num_nodes: self.num_nodes,
            num_edges: arcs.len(),
            out_offsets: offsets.clone(),
            out_targets: targets.clone(),
            in_offsets: offsets,
            in_targets: targets,
            time_steps: self.time_steps.clone(),
            external_ids: self.external_ids.clone(),
            id_index: self.id_index.clone(),
        }
    }

    /// Unordered pair count of a symmetric view.
    pub fn undirected_pair_count(&self) -> usize {
        debug_assert_eq!(self.num_edges % 2, 0);
        self.num_edges / 2
    }

    /// Structural invariants: monotone offsets closing at `num_edges`, valid
    /// endpoints. Cheap enough to run after every load.
    pub fn validate(&self) -> Result<()> {
        for offsets in [&self.out_offsets, &self.in_offsets] {
            if offsets.len() != self.num_nodes + 1 {
                return Err(Error::Config("adjacency offsets have wrong length".into()));
            }
            if offsets.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Config("adjacency offsets not monotone".into()));
            }
            if *offsets.last().unwrap_or(&0) != self.num_edges {
                return Err(Error::Config(
                    "last adjacency offset does not equal edge count".into(),
                ));
            }
        }
        let bad = self
            .out_targets
            .iter()
            .chain(self.in_targets.iter())
            .any(|&t| (t as usize) >= self.num_nodes);
        if bad {
            return Err(Error::Config("edge endpoint out of range".into()));
        }
        Ok(())
    }
}

/// Counting-sort CSR build; per-node target lists come out sorted so the
/// layout is canonical regardless of edge-list row order.
fn build_csr(
    num_nodes: usize,
    edges: impl Iterator<Item = (u32, u32)> + Clone,
) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; num_nodes + 1];
    for (s, _) in edges.clone() {
        offsets[s as usize + 1] += 1;
    }
    for i in 0..num_nodes {
        offsets[i + 1] += offsets[i];
    }
    let mut targets = vec![0u32; *offsets.last().unwrap_or(&0)];
    let mut cursor = offsets.clone();
    for (s, t) in edges {
        targets[cursor[s as usize]] = t;
        cursor[s as usize] += 1;
    }
    for v in 0..num_nodes {
        targets[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    (offsets, targets)
}

/// Per-node features and labels aligned with dense node indices.
#[derive(Debug, Clone)]
pub struct NodeTable {
    pub local: Array2<f64>,
    pub aggregated: Array2<f64>,
    pub labels: Vec<Label>,
}

impl NodeTable {
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn label_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for l in &self.labels {
            match l {
                Label::Illicit => counts.0 += 1,
                Label::Licit => counts.1 += 1,
                Label::Unknown => counts.2 += 1,
            }
        }
        counts
    }

    /// Both feature blocks side by side: `[local | aggregated]`.
    pub fn intrinsic_features(&self) -> Array2<f64> {
        ndarray::concatenate(
            ndarray::Axis(1),
            &[self.local.view(), self.aggregated.view()],
        )
        .expect("row counts agree")
    }
}

/// Temporal split masks plus the supervised sub-mask excluding Unknown nodes.
#[derive(Debug, Clone)]
pub struct SplitMasks {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
    pub supervised: Vec<bool>,
}

/// Labelled-node counts per split, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub train_total: usize,
    pub val_total: usize,
    pub test_total: usize,
    pub train_labelled: usize,
    pub val_labelled: usize,
    pub test_labelled: usize,
}

impl SplitMasks {
    /// Indices where both `mask` and the supervised sub-mask are set.
    pub fn supervised_indices(&self, mask: &[bool]) -> Vec<u32> {
        mask.iter()
            .zip(&self.supervised)
            .enumerate()
            .filter(|(_, (m, s))| **m && **s)
            .map(|(i, _)| i as u32)
            .collect()
    }
}

/// Derives train/val/test masks from node time steps.
///
/// Train covers steps 1..=30, validation 31..=40, test 41..=49. A node with a
/// time step outside 1..=49 is a data error.
pub fn make_splits(
    graph: &TransactionGraph,
    table: &NodeTable,
) -> Result<(SplitMasks, SplitCounts)> {
    let n = graph.num_nodes();
    let mut masks = SplitMasks {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![false; n],
        supervised: vec![false; n],
    };
    let mut counts = SplitCounts {
        train_total: 0,
        val_total: 0,
        test_total: 0,
        train_labelled: 0,
        val_labelled: 0,
        test_labelled: 0,
    };
    for v in 0..n {
        let step = graph.time_steps()[v];
        if step == 0 || step > MAX_TIME_STEP {
            return Err(Error::Config(format!(
                "node {} has time step {} outside 1..={}",
                v, step, MAX_TIME_STEP
            )));
        }
        let labelled = table.labels[v] != Label::Unknown;
        masks.supervised[v] = labelled;
        if step <= TRAIN_END {
            masks.train[v] = true;
            counts.train_total += 1;
            counts.train_labelled += usize::from(labelled);
        } else if step <= VAL_END {
            masks.val[v] = true;
            counts.val_total += 1;
            counts.val_labelled += usize::from(labelled);
        } else {
            masks.test[v] = true;
            counts.test_total += 1;
            counts.test_labelled += usize::from(labelled);
        }
    }
    Ok((masks, counts))
}
