//! Skip-gram with negative sampling over a fixed walk corpus.
//!
//! For every (center, context) pair within the window the objective is
//! log sigmoid(u . v) plus the sum of log sigmoid(-u . v_neg) over negatives
//! drawn from the corpus unigram distribution raised to the 3/4 power.
//! Input vectors start uniform in [-0.5/dim, 0.5/dim], output vectors at
//! zero (the word2vec convention); the learning rate decays linearly to
//! 1e-4 of its initial value over all scheduled updates.

use ndarray::Array2;
use rand::Rng;

use crate::embed::{EmbeddingMatrix, WalkConfig, WalkKind};
use crate::error::{Error, Result};
use crate::rng;

pub fn train_skipgram(
    walks: &[Vec<u32>],
    num_nodes: usize,
    kind: WalkKind,
    cfg: &WalkConfig,
) -> Result<EmbeddingMatrix> {
    let (vectors, _) = train_with_losses(walks, num_nodes, cfg)?;
    Ok(EmbeddingMatrix {
        method: kind,
        vectors,
    })
}

/// Mean per-epoch losses alongside the trained vectors.
pub fn skipgram_epoch_losses(
    walks: &[Vec<u32>],
    num_nodes: usize,
    cfg: &WalkConfig,
) -> Result<Vec<f64>> {
    Ok(train_with_losses(walks, num_nodes, cfg)?.1)
}

fn train_with_losses(
    walks: &[Vec<u32>],
    num_nodes: usize,
    cfg: &WalkConfig,
) -> Result<(Array2<f64>, Vec<f64>)> {
    let dim = cfg.latent_dim;
    let mut init_rng = rng::stream_tagged(cfg.seed, "skipgram-init", &[]);
    let span = 0.5 / dim as f64;
    let mut input = Array2::from_shape_fn((num_nodes, dim), |_| init_rng.random_range(-span..span));
    let mut output = Array2::<f64>::zeros((num_nodes, dim));

    let table = NegativeTable::from_walks(walks, num_nodes);
    let total_pairs = count_pairs(walks, cfg.window);
    if total_pairs == 0 || table.is_empty() {
        // Degenerate corpus (for instance a single isolated node): nothing
        // to train on, the initialization is the embedding.
        return Ok((input, vec![0.0; cfg.epochs]));
    }

    let total_updates = (total_pairs * cfg.epochs as u64) as f64;
    let min_lr_fraction = 1e-4;
    let mut processed = 0u64;
    let mut grad = vec![0.0; dim];
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let mut epoch_rng = rng::stream_tagged(cfg.seed, "skipgram-epoch", &[epoch as u64]);
        let mut epoch_loss = 0.0;
        for walk in walks {
            for (center_pos, &center) in walk.iter().enumerate() {
                let lo = center_pos.saturating_sub(cfg.window);
                let hi = (center_pos + cfg.window).min(walk.len() - 1);
                for context_pos in lo..=hi {
                    if context_pos == center_pos {
                        continue;
                    }
                    let progress = processed as f64 / total_updates;
                    let lr = cfg.learning_rate
                        * (1.0 - progress * (1.0 - min_lr_fraction)).max(min_lr_fraction);
                    processed += 1;
                    epoch_loss += sgns_update(
                        &mut input,
                        &mut output,
                        center,
                        walk[context_pos],
                        &table,
                        cfg.negatives_per_positive,
                        lr,
                        &mut grad,
                        &mut epoch_rng,
                    );
                }
            }
        }
        if !epoch_loss.is_finite() {
            return Err(Error::NanLoss {
                epoch,
                details: format!("skip-gram loss over {} pairs", total_pairs),
            });
        }
        losses.push(epoch_loss / total_pairs as f64);
    }
    Ok((input, losses))
}

fn count_pairs(walks: &[Vec<u32>], window: usize) -> u64 {
    let mut pairs = 0u64;
    for walk in walks {
        for center in 0..walk.len() {
            let lo = center.saturating_sub(window);
            let hi = (center + window).min(walk.len() - 1);
            pairs += (hi - lo) as u64;
        }
    }
    pairs
}

/// One positive update plus negatives; returns the pair loss.
#[allow(clippy::too_many_arguments)]
fn sgns_update(
    input: &mut Array2<f64>,
    output: &mut Array2<f64>,
    center: u32,
    context: u32,
    table: &NegativeTable,
    negatives: usize,
    lr: f64,
    grad: &mut [f64],
    rng: &mut impl Rng,
) -> f64 {
    let dim = grad.len();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;

    let apply = |target: u32, label: f64, output: &mut Array2<f64>, grad: &mut [f64]| {
        let mut dot = 0.0;
        for d in 0..dim {
            dot += input[(center as usize, d)] * output[(target as usize, d)];
        }
        let pred = sigmoid(dot);
        let g = (label - pred) * lr;
        for d in 0..dim {
            grad[d] += g * output[(target as usize, d)];
            output[(target as usize, d)] += g * input[(center as usize, d)];
        }
        if label == 1.0 {
            -pred.max(1e-12).ln()
        } else {
            -(1.0 - pred).max(1e-12).ln()
        }
    };

    loss += apply(context, 1.0, output, grad);
    for _ in 0..negatives {
        let mut negative = table.sample(rng);
        let mut tries = 0;
        while negative == context && tries < 10 {
            negative = table.sample(rng);
            tries += 1;
        }
        if negative == context {
            continue;
        }
        loss += apply(negative, 0.0, output, grad);
    }

    for d in 0..dim {
        input[(center as usize, d)] += grad[d];
    }
    loss
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Cumulative unigram^(3/4) table sampled by binary search.
struct NegativeTable {
    nodes: Vec<u32>,
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn from_walks(walks: &[Vec<u32>], num_nodes: usize) -> Self {
        let mut counts = vec![0u64; num_nodes];
        for walk in walks {
            for &v in walk {
                counts[v as usize] += 1;
            }
        }
        let mut nodes = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = 0.0;
        for (v, &c) in counts.iter().enumerate() {
            if c > 0 {
                total += (c as f64).powf(0.75);
                nodes.push(v as u32);
                cumulative.push(total);
            }
        }
        NegativeTable { nodes, cumulative }
    }

    fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn sample(&self, rng: &mut impl Rng) -> u32 {
        let total = *self.cumulative.last().expect("non-empty table");
        let draw = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c < draw);
        self.nodes[idx.min(self.nodes.len() - 1)]
    }
}
