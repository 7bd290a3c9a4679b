//! Graph neural networks: GCN, GraphSAGE, GATv2 and GIN, each followed by a
//! single linear prediction layer and trained end-to-end on masked labels.
//!
//! Message passing treats edges as undirected by default; `directed_mp`
//! restores propagation along the stored arc direction.

mod train;

pub use train::{train_gnn, train_indices};

use std::rc::Rc;

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::TransactionGraph;
use crate::nn::{glorot_uniform, Segments, SparseMatrix, Tape, Tensor};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnnKind {
    Gcn,
    GraphSage,
    Gat,
    Gin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Min,
    Mean,
    Max,
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Aggregator::Min),
            "mean" => Ok(Aggregator::Mean),
            "max" => Ok(Aggregator::Max),
            other => Err(Error::Config(format!("unknown aggregator {:?}", other))),
        }
    }
}

impl std::fmt::Display for Aggregator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Aggregator::Min => write!(f, "min"),
            Aggregator::Mean => write!(f, "mean"),
            Aggregator::Max => write!(f, "max"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GnnConfig {
    pub kind: GnnKind,
    pub latent_dim: usize,
    /// Width of non-final layers for GCN and GraphSAGE; GAT and GIN use the
    /// latent dimension throughout.
    pub hidden_dim: usize,
    pub layers: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Neighbor sample size (GraphSAGE).
    pub sample_size: usize,
    /// Attention heads (GAT).
    pub heads: usize,
    pub aggregator: Aggregator,
    pub directed_mp: bool,
    pub balanced_class_weights: bool,
    pub leaky_slope: f64,
    pub seed: u64,
}

impl Default for GnnConfig {
    fn default() -> Self {
        GnnConfig {
            kind: GnnKind::Gcn,
            latent_dim: 64,
            hidden_dim: 128,
            layers: 2,
            dropout: 0.0,
            learning_rate: 0.01,
            epochs: 100,
            sample_size: 2,
            heads: 1,
            aggregator: Aggregator::Max,
            directed_mp: false,
            balanced_class_weights: false,
            leaky_slope: 0.2,
            seed: 0,
        }
    }
}

/// Per-destination neighbor lists in segment form, ready for gather and
/// segment reductions on the tape.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    pub segments: Rc<Segments>,
    pub sources: Rc<Vec<u32>>,
    pub destinations: Rc<Vec<u32>>,
}

impl NeighborIndex {
    fn from_lists(lists: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut sources = Vec::new();
        let mut destinations = Vec::new();
        for (dst, list) in lists.iter().enumerate() {
            sources.extend_from_slice(list);
            destinations.extend(std::iter::repeat_n(dst as u32, list.len()));
            offsets.push(sources.len());
        }
        NeighborIndex {
            segments: Rc::new(Segments { offsets }),
            sources: Rc::new(sources),
            destinations: Rc::new(destinations),
        }
    }
}

/// Fixed message-passing indices shared by every epoch of a training run.
#[derive(Debug, Clone)]
pub struct MessageStructure {
    pub num_nodes: usize,
    /// Neighbor lists without self-loops (GIN, SAGE sampling pool).
    pub neighbors: NeighborIndex,
    /// Self-loop prepended to each list (GAT candidate sets).
    pub with_self: NeighborIndex,
    /// Symmetric normalization coefficients over A + I (GCN).
    pub gcn_norm: Rc<SparseMatrix>,
}

/// Builds message-passing indices from `adjacency`, reading in-neighbors.
/// Pass the undirected view for symmetric propagation or the directed graph
/// for `directed_mp`.
pub fn build_message_structure(adjacency: &TransactionGraph) -> MessageStructure {
    let n = adjacency.num_nodes();
    let lists: Vec<Vec<u32>> = (0..n as u32)
        .map(|v| adjacency.in_neighbors(v).to_vec())
        .collect();
    let with_self_lists: Vec<Vec<u32>> = lists
        .iter()
        .enumerate()
        .map(|(v, list)| {
            let mut l = Vec::with_capacity(list.len() + 1);
            l.push(v as u32);
            l.extend_from_slice(list);
            l
        })
        .collect();

    // deg~ counts the self-loop; coefficients 1/sqrt(deg~(i) deg~(j)).
    let degree: Vec<f64> = with_self_lists.iter().map(|l| l.len() as f64).collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for (i, list) in with_self_lists.iter().enumerate() {
        for &j in list {
            cols.push(j);
            vals.push(1.0 / (degree[i] * degree[j as usize]).sqrt());
        }
        offsets.push(cols.len());
    }

    MessageStructure {
        num_nodes: n,
        neighbors: NeighborIndex::from_lists(&lists),
        with_self: NeighborIndex::from_lists(&with_self_lists),
        gcn_norm: Rc::new(SparseMatrix {
            offsets,
            cols,
            vals,
            num_cols: n,
        }),
    }
}

/// Draws `min(sample_size, degree)` neighbors per node without replacement.
pub fn sample_neighbors(
    structure: &MessageStructure,
    sample_size: usize,
    rng: &mut ChaCha8Rng,
) -> NeighborIndex {
    let segs = &structure.neighbors.segments;
    let sources = &structure.neighbors.sources;
    let mut lists: Vec<Vec<u32>> = Vec::with_capacity(structure.num_nodes);
    for v in 0..structure.num_nodes {
        let range = segs.range(v);
        let degree = range.len();
        let pool = &sources[range];
        if degree <= sample_size {
            lists.push(pool.to_vec());
        } else {
            let picked = rand::seq::index::sample(rng, degree, sample_size);
            lists.push(picked.into_iter().map(|i| pool[i]).collect());
        }
    }
    NeighborIndex::from_lists(&lists)
}

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GcnLayer {
    pub weight: Array2<f64>,
}

impl GcnLayer {
    /// Symmetric-normalized propagation: spmm(norm, H W), optional rectifier.
    pub fn forward_on(
        &self,
        tape: &mut Tape,
        h: Tensor,
        norm: &Rc<SparseMatrix>,
        activate: bool,
    ) -> Result<(Tensor, Vec<Tensor>)> {
        check_dim("gcn_forward", tape, h, self.weight.dim().0)?;
        let w = tape.leaf(self.weight.clone());
        let xw = tape.matmul(h, w);
        let mut out = tape.spmm(Rc::clone(norm), xw);
        if activate {
            out = tape.relu(out);
        }
        Ok((out, vec![w]))
    }
}

#[derive(Debug, Clone)]
pub struct SageLayer {
    /// Acts on `[self || aggregated-neighbors]`, hence 2 * in_dim rows.
    pub weight: Array2<f64>,
}

impl SageLayer {
    pub fn forward_on(
        &self,
        tape: &mut Tape,
        h: Tensor,
        sampled: &NeighborIndex,
        aggregator: Aggregator,
        activate: bool,
    ) -> Result<(Tensor, Vec<Tensor>)> {
        check_dim("sage_forward", tape, h, self.weight.dim().0 / 2)?;
        let w = tape.leaf(self.weight.clone());
        let gathered = tape.gather(h, Rc::clone(&sampled.sources));
        let aggregated = match aggregator {
            Aggregator::Min => tape.segment_min(gathered, Rc::clone(&sampled.segments)),
            Aggregator::Mean => tape.segment_mean(gathered, Rc::clone(&sampled.segments)),
            Aggregator::Max => tape.segment_max(gathered, Rc::clone(&sampled.segments)),
        };
        let cat = tape.concat(h, aggregated);
        let mut out = tape.matmul(cat, w);
        if activate {
            out = tape.relu(out);
        }
        Ok((out, vec![w]))
    }
}

/// One GATv2 head: e_ij = a^T LeakyReLU(h_i W_dst + h_j W_src), attention
/// normalized over the candidate set (self included), messages h_j W_src.
#[derive(Debug, Clone)]
pub struct GatHead {
    pub w_dst: Array2<f64>,
    pub w_src: Array2<f64>,
    pub att: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct GatLayer {
    pub heads: Vec<GatHead>,
    pub slope: f64,
}

impl GatLayer {
    /// Normalized attention weights of one head for inspection; runs the
    /// same tape ops as the forward pass. Entry k weights the k-th edge row
    /// of `with_self`.
    pub fn attention_coefficients(
        &self,
        h: &Array2<f64>,
        with_self: &NeighborIndex,
        head: usize,
    ) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let ht = tape.leaf(h.clone());
        check_dim("gat_forward", &tape, ht, self.heads[head].w_dst.dim().0)?;
        let (alpha, _, _) = self.head_attention(&mut tape, ht, with_self, head);
        Ok(tape.value(alpha).column(0).to_vec())
    }

    /// Builds one head's attention: returns (alpha over edge rows, per-edge
    /// source messages h_j W_src, registered parameters).
    fn head_attention(
        &self,
        tape: &mut Tape,
        h: Tensor,
        with_self: &NeighborIndex,
        head: usize,
    ) -> (Tensor, Tensor, [Tensor; 3]) {
        let spec = &self.heads[head];
        let w_dst = tape.leaf(spec.w_dst.clone());
        let w_src = tape.leaf(spec.w_src.clone());
        let att = tape.leaf(spec.att.clone());
        let hd = tape.matmul(h, w_dst);
        let hs = tape.matmul(h, w_src);
        let edge_src = tape.gather(hs, Rc::clone(&with_self.sources));
        let edge_dst = tape.gather(hd, Rc::clone(&with_self.destinations));
        let pre = tape.add(edge_dst, edge_src);
        let pre = tape.leaky_relu(pre, self.slope);
        let scores = tape.matmul(pre, att);
        let alpha = tape.segment_softmax(scores, Rc::clone(&with_self.segments));
        (alpha, edge_src, [w_dst, w_src, att])
    }

    /// `average` combines heads by mean (output layer); otherwise heads are
    /// concatenated.
    pub fn forward_on(
        &self,
        tape: &mut Tape,
        h: Tensor,
        with_self: &NeighborIndex,
        average: bool,
        activate: bool,
    ) -> Result<(Tensor, Vec<Tensor>)> {
        check_dim("gat_forward", tape, h, self.heads[0].w_dst.dim().0)?;
        let mut params = Vec::with_capacity(self.heads.len() * 3);
        let mut head_outputs = Vec::with_capacity(self.heads.len());
        for head in 0..self.heads.len() {
            let (alpha, edge_src, head_params) = self.head_attention(tape, h, with_self, head);
            params.extend(head_params);
            let weighted = tape.mul_col(edge_src, alpha);
            head_outputs.push(tape.segment_sum(weighted, Rc::clone(&with_self.segments)));
        }

        let mut out = head_outputs[0];
        if head_outputs.len() > 1 {
            if average {
                for &o in &head_outputs[1..] {
                    out = tape.add(out, o);
                }
                out = tape.scale_const(out, 1.0 / head_outputs.len() as f64);
            } else {
                for &o in &head_outputs[1..] {
                    out = tape.concat(out, o);
                }
            }
        }
        if activate {
            out = tape.relu(out);
        }
        Ok((out, params))
    }
}

/// GIN update: MLP((1 + eps) h_v + sum of neighbor features); the two-layer
/// MLP carries the nonlinearity, there is no outer activation.
#[derive(Debug, Clone)]
pub struct GinLayer {
    pub eps: Array2<f64>,
    pub w1: Array2<f64>,
    pub b1: Array2<f64>,
    pub w2: Array2<f64>,
    pub b2: Array2<f64>,
}

impl GinLayer {
    pub fn forward_on(
        &self,
        tape: &mut Tape,
        h: Tensor,
        neighbors: &NeighborIndex,
    ) -> Result<(Tensor, Vec<Tensor>)> {
        check_dim("gin_forward", tape, h, self.w1.dim().0)?;
        let eps = tape.leaf(self.eps.clone());
        let w1 = tape.leaf(self.w1.clone());
        let b1 = tape.leaf(self.b1.clone());
        let w2 = tape.leaf(self.w2.clone());
        let b2 = tape.leaf(self.b2.clone());

        let gathered = tape.gather(h, Rc::clone(&neighbors.sources));
        let neighbor_sum = tape.segment_sum(gathered, Rc::clone(&neighbors.segments));
        let one_plus_eps = tape.add_const(eps, 1.0);
        let scaled_self = tape.scale_scalar(h, one_plus_eps);
        let pre = tape.add(scaled_self, neighbor_sum);

        let z = tape.matmul(pre, w1);
        let z = tape.add_bias(z, b1);
        let z = tape.relu(z);
        let z = tape.matmul(z, w2);
        let out = tape.add_bias(z, b2);
        Ok((out, vec![eps, w1, b1, w2, b2]))
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Gcn(GcnLayer),
    Sage(SageLayer),
    Gat(GatLayer),
    Gin(GinLayer),
}

fn check_dim(context: &'static str, tape: &Tape, h: Tensor, expected: usize) -> Result<()> {
    let actual = tape.value(h).dim().1;
    if actual != expected {
        return Err(Error::Shape {
            context,
            expected: format!("n x {}", expected),
            actual: format!("n x {}", actual),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GnnModel {
    pub config: GnnConfig,
    pub layers: Vec<Layer>,
    pub out_weight: Array2<f64>,
    pub out_bias: Array2<f64>,
}

pub(crate) struct ForwardCtx<'a> {
    pub structure: &'a MessageStructure,
    /// Per-layer sampled neighbor lists; only read by GraphSAGE.
    pub sage_samples: &'a [NeighborIndex],
    pub dropout: f64,
    pub dropout_rng: Option<&'a mut ChaCha8Rng>,
}

impl GnnModel {
    pub fn new(cfg: &GnnConfig, input_dim: usize, seed: u64) -> Self {
        let mut rng = rng::stream_tagged(seed, "gnn-init", &[]);
        let mut layers = Vec::with_capacity(cfg.layers);
        let mut width = input_dim;
        for l in 0..cfg.layers {
            let last = l + 1 == cfg.layers;
            let out = match cfg.kind {
                GnnKind::Gcn | GnnKind::GraphSage => {
                    if last {
                        cfg.latent_dim
                    } else {
                        cfg.hidden_dim
                    }
                }
                GnnKind::Gat | GnnKind::Gin => cfg.latent_dim,
            };
            let layer = match cfg.kind {
                GnnKind::Gcn => Layer::Gcn(GcnLayer {
                    weight: glorot_uniform(width, out, &mut rng),
                }),
                GnnKind::GraphSage => Layer::Sage(SageLayer {
                    weight: glorot_uniform(2 * width, out, &mut rng),
                }),
                GnnKind::Gat => {
                    let heads = (0..cfg.heads)
                        .map(|_| GatHead {
                            w_dst: glorot_uniform(width, out, &mut rng),
                            w_src: glorot_uniform(width, out, &mut rng),
                            att: glorot_uniform(out, 1, &mut rng),
                        })
                        .collect();
                    Layer::Gat(GatLayer {
                        heads,
                        slope: cfg.leaky_slope,
                    })
                }
                GnnKind::Gin => Layer::Gin(GinLayer {
                    eps: Array2::zeros((1, 1)),
                    w1: glorot_uniform(width, out, &mut rng),
                    b1: Array2::zeros((1, out)),
                    w2: glorot_uniform(out, out, &mut rng),
                    b2: Array2::zeros((1, out)),
                }),
            };
            layers.push(layer);
            width = match cfg.kind {
                // Hidden GAT layers concatenate heads; the final layer averages.
                GnnKind::Gat if !last => out * cfg.heads,
                _ => out,
            };
        }
        GnnModel {
            config: cfg.clone(),
            layers,
            out_weight: glorot_uniform(width, 2, &mut rng),
            out_bias: Array2::zeros((1, 2)),
        }
    }

    pub(crate) fn forward(
        &self,
        tape: &mut Tape,
        x: Tensor,
        ctx: &mut ForwardCtx<'_>,
    ) -> Result<(Tensor, Vec<Tensor>)> {
        let mut params = Vec::new();
        let mut h = x;
        let layer_count = self.layers.len();
        for (l, layer) in self.layers.iter().enumerate() {
            let last = l + 1 == layer_count;
            let (out, layer_params) = match layer {
                Layer::Gcn(gcn) => gcn.forward_on(tape, h, &ctx.structure.gcn_norm, true)?,
                Layer::Sage(sage) => {
                    sage.forward_on(tape, h, &ctx.sage_samples[l], self.config.aggregator, true)?
                }
                Layer::Gat(gat) => gat.forward_on(tape, h, &ctx.structure.with_self, last, true)?,
                Layer::Gin(gin) => gin.forward_on(tape, h, &ctx.structure.neighbors)?,
            };
            params.extend(layer_params);
            h = out;
            if ctx.dropout > 0.0 {
                let rng = ctx
                    .dropout_rng
                    .as_deref_mut()
                    .expect("dropout requires an rng stream");
                h = tape.dropout(h, ctx.dropout, rng);
            }
        }

        let w = tape.leaf(self.out_weight.clone());
        let b = tape.leaf(self.out_bias.clone());
        let logits = tape.matmul(h, w);
        let logits = tape.add_bias(logits, b);
        params.extend([w, b]);
        Ok((logits, params))
    }

    /// Evaluation-mode forward pass (dropout off, deterministic SAGE
    /// sampling) returning illicit-class probabilities per node.
    pub fn scores(&self, features: &Array2<f64>, structure: &MessageStructure) -> Result<Vec<f64>> {
        let logits = self.logits(features, structure)?;
        Ok(crate::nn::softmax_illicit(&logits))
    }

    pub fn logits(
        &self,
        features: &Array2<f64>,
        structure: &MessageStructure,
    ) -> Result<Array2<f64>> {
        let sage_samples = self.eval_samples(structure);
        let mut tape = Tape::new();
        let x = tape.leaf(features.clone());
        let mut ctx = ForwardCtx {
            structure,
            sage_samples: &sage_samples,
            dropout: 0.0,
            dropout_rng: None,
        };
        let (logits, _) = self.forward(&mut tape, x, &mut ctx)?;
        Ok(tape.value(logits).clone())
    }

    pub(crate) fn eval_samples(&self, structure: &MessageStructure) -> Vec<NeighborIndex> {
        if self.config.kind != GnnKind::GraphSage {
            return Vec::new();
        }
        (0..self.layers.len())
            .map(|l| {
                let mut rng = rng::stream_tagged(self.config.seed, "sage-sample-eval", &[l as u64]);
                sample_neighbors(structure, self.config.sample_size, &mut rng)
            })
            .collect()
    }

    /// Parameters in a stable order matching `forward`'s registration order.
    pub fn params_mut(&mut self) -> Vec<&mut Array2<f64>> {
        let mut out: Vec<&mut Array2<f64>> = Vec::new();
        for layer in self.layers.iter_mut() {
            match layer {
                Layer::Gcn(l) => out.push(&mut l.weight),
                Layer::Sage(l) => out.push(&mut l.weight),
                Layer::Gat(l) => {
                    for head in l.heads.iter_mut() {
                        out.push(&mut head.w_dst);
                        out.push(&mut head.w_src);
                        out.push(&mut head.att);
                    }
                }
                Layer::Gin(l) => {
                    out.push(&mut l.eps);
                    out.push(&mut l.w1);
                    out.push(&mut l.b1);
                    out.push(&mut l.w2);
                    out.push(&mut l.b2);
                }
            }
        }
        out.push(&mut self.out_weight);
        out.push(&mut self.out_bias);
        out
    }

    pub fn param_shapes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Gcn(l) => out.push(l.weight.dim()),
                Layer::Sage(l) => out.push(l.weight.dim()),
                Layer::Gat(l) => {
                    for head in &l.heads {
                        out.push(head.w_dst.dim());
                        out.push(head.w_src.dim());
                        out.push(head.att.dim());
                    }
                }
                Layer::Gin(l) => {
                    out.push(l.eps.dim());
                    out.push(l.w1.dim());
                    out.push(l.b1.dim());
                    out.push(l.w2.dim());
                    out.push(l.b2.dim());
                }
            }
        }
        out.push(self.out_weight.dim());
        out.push(self.out_bias.dim());
        out
    }

    pub fn named_tensors(&self) -> Vec<(String, &Array2<f64>)> {
        let mut out: Vec<(String, &Array2<f64>)> = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Gcn(l) => out.push((format!("layer{}_w", i), &l.weight)),
                Layer::Sage(l) => out.push((format!("layer{}_w", i), &l.weight)),
                Layer::Gat(l) => {
                    for (h, head) in l.heads.iter().enumerate() {
                        out.push((format!("layer{}_head{}_wdst", i, h), &head.w_dst));
                        out.push((format!("layer{}_head{}_wsrc", i, h), &head.w_src));
                        out.push((format!("layer{}_head{}_att", i, h), &head.att));
                    }
                }
                Layer::Gin(l) => {
                    out.push((format!("layer{}_eps", i), &l.eps));
                    out.push((format!("layer{}_w1", i), &l.w1));
                    out.push((format!("layer{}_b1", i), &l.b1));
                    out.push((format!("layer{}_w2", i), &l.w2));
                    out.push((format!("layer{}_b2", i), &l.b2));
                }
            }
        }
        out.push(("out_w".into(), &self.out_weight));
        out.push(("out_b".into(), &self.out_bias));
        out
    }
}

#[cfg(test)]
mod tests;
