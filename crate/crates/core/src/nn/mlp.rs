//! MLP decoder for tabular feature sets: rectified hidden layers feeding a
//! two-logit output, trained full-batch with Adam on masked cross-entropy.

use std::rc::Rc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::eval;
use crate::graph::Label;
use crate::nn::adam::{Adam, AdamConfig};
use crate::nn::tape::{CeTargets, Tape, Tensor};
use crate::nn::{glorot_uniform, softmax_illicit, EpochLog};
use crate::rng;

#[derive(Debug, Clone)]
pub struct DecoderConfig {
    pub hidden_layers: usize,
    pub hidden_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub balanced_class_weights: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct MlpDecoder {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array2<f64>>,
}

impl MlpDecoder {
    /// Glorot-initialized decoder: `input_dim -> hidden^layers -> 2`.
    pub fn new(input_dim: usize, hidden_dim: usize, hidden_layers: usize, seed: u64) -> Self {
        let mut dims = Vec::with_capacity(hidden_layers + 2);
        dims.push(input_dim);
        dims.extend(std::iter::repeat_n(hidden_dim, hidden_layers));
        dims.push(2);

        let mut rng = rng::stream_tagged(seed, "decoder-init", &[]);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in dims.windows(2) {
            weights.push(glorot_uniform(w[0], w[1], &mut rng));
            biases.push(Array2::zeros((1, w[1])));
        }
        MlpDecoder { weights, biases }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].dim().0
    }

    /// Registers parameters on the tape and builds the forward graph.
    /// Returns the logits plus parameter tensors ordered `[w0, b0, w1, ...]`.
    pub fn forward_on(&self, tape: &mut Tape, x: Tensor) -> Result<(Tensor, Vec<Tensor>)> {
        if tape.value(x).dim().1 != self.input_dim() {
            return Err(Error::Shape {
                context: "mlp_forward",
                expected: format!("n x {}", self.input_dim()),
                actual: format!("n x {}", tape.value(x).dim().1),
            });
        }
        let mut params = Vec::with_capacity(self.weights.len() * 2);
        let mut h = x;
        let last = self.weights.len() - 1;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let wt = tape.leaf(w.clone());
            let bt = tape.leaf(b.clone());
            params.push(wt);
            params.push(bt);
            let z = tape.matmul(h, wt);
            let z = tape.add_bias(z, bt);
            h = if i < last { tape.relu(z) } else { z };
        }
        Ok((h, params))
    }

    /// Pure evaluation-mode forward pass.
    pub fn logits(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        if features.dim().1 != self.input_dim() {
            return Err(Error::Shape {
                context: "mlp_forward",
                expected: format!("n x {}", self.input_dim()),
                actual: format!("n x {}", features.dim().1),
            });
        }
        let mut h = features.clone();
        let last = self.weights.len() - 1;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = h.dot(w);
            z += b;
            h = if i < last { z.mapv(|v| v.max(0.0)) } else { z };
        }
        Ok(h)
    }

    /// Illicit-class probabilities for each row.
    pub fn scores(&self, features: &Array2<f64>) -> Result<Vec<f64>> {
        Ok(softmax_illicit(&self.logits(features)?))
    }

    pub fn param_shapes(&self) -> Vec<(usize, usize)> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.dim(), b.dim()])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Array2<f64>> {
        let mut out: Vec<&mut Array2<f64>> = Vec::new();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w);
            out.push(b);
        }
        out
    }

    pub fn named_tensors(&self) -> Vec<(String, &Array2<f64>)> {
        let mut out = Vec::new();
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            out.push((format!("w{}", i), w));
            out.push((format!("b{}", i), b));
        }
        out
    }
}

/// Inverse-prevalence class weights over the masked labelled nodes, or
/// uniform weights when `balanced` is off.
pub fn class_weights(labels: &[Label], indices: &[u32], balanced: bool) -> [f64; 2] {
    if !balanced {
        return [1.0, 1.0];
    }
    let mut counts = [0usize; 2];
    for &i in indices {
        match labels[i as usize] {
            Label::Licit => counts[0] += 1,
            Label::Illicit => counts[1] += 1,
            Label::Unknown => {}
        }
    }
    let total = (counts[0] + counts[1]) as f64;
    [
        total / (2.0 * counts[0].max(1) as f64),
        total / (2.0 * counts[1].max(1) as f64),
    ]
}

/// Weighted mean negative log-likelihood of two-logit rows, evaluation path.
pub fn ce_loss(logits: &Array2<f64>, classes: &[u8], weights: [f64; 2]) -> f64 {
    let mut loss = 0.0;
    let mut weight_sum = 0.0;
    for (row, &class) in logits.rows().into_iter().zip(classes) {
        let (z0, z1) = (row[0], row[1]);
        let m = z0.max(z1);
        let lse = m + ((z0 - m).exp() + (z1 - m).exp()).ln();
        let zy = if class == 0 { z0 } else { z1 };
        let w = weights[class as usize];
        loss += w * (lse - zy);
        weight_sum += w;
    }
    if weight_sum == 0.0 {
        0.0
    } else {
        loss / weight_sum
    }
}

fn gather_rows(features: &Array2<f64>, indices: &[u32]) -> Array2<f64> {
    let mut out = Array2::zeros((indices.len(), features.dim().1));
    for (k, &i) in indices.iter().enumerate() {
        out.row_mut(k).assign(&features.row(i as usize));
    }
    out
}

fn labelled_classes(labels: &[Label], indices: &[u32]) -> Vec<u8> {
    indices
        .iter()
        .map(|&i| u8::from(labels[i as usize] == Label::Illicit))
        .collect()
}

/// Trains the MLP decoder on the labelled training rows and logs
/// per-epoch validation loss and AUC-PR.
///
/// `train_idx` and `val_idx` must hold supervised (labelled) node indices.
pub fn train_decoder(
    features: &Array2<f64>,
    labels: &[Label],
    train_idx: &[u32],
    val_idx: &[u32],
    cfg: &DecoderConfig,
) -> Result<(MlpDecoder, Vec<EpochLog>)> {
    if train_idx.is_empty() {
        return Err(Error::EmptyMask);
    }
    let train_features = gather_rows(features, train_idx);
    let val_features = gather_rows(features, val_idx);
    let train_classes = labelled_classes(labels, train_idx);
    let val_classes = labelled_classes(labels, val_idx);
    let val_illicit: Vec<bool> = val_classes.iter().map(|&c| c == 1).collect();
    let weights = class_weights(labels, train_idx, cfg.balanced_class_weights);

    let targets = Rc::new(CeTargets {
        rows: (0..train_idx.len() as u32).collect(),
        classes: train_classes,
        weights,
    });

    let mut decoder = MlpDecoder::new(
        features.dim().1,
        cfg.hidden_dim,
        cfg.hidden_layers,
        cfg.seed,
    );
    let mut adam = Adam::new(
        AdamConfig::with_lr(cfg.learning_rate),
        &decoder.param_shapes(),
    );

    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let mut tape = Tape::new();
        let x = tape.leaf(train_features.clone());
        let (logits, param_ids) = decoder.forward_on(&mut tape, x)?;
        let loss = tape.masked_cross_entropy(logits, Rc::clone(&targets))?;
        let train_loss = tape.value(loss)[(0, 0)];
        if !train_loss.is_finite() {
            return Err(Error::NanLoss {
                epoch,
                details: "decoder training loss".into(),
            });
        }
        tape.backward(loss)?;
        let grads: Vec<Array2<f64>> = param_ids
            .iter()
            .map(|&p| tape.take_grad(p).expect("parameter on loss path"))
            .collect();
        adam.step(&mut decoder.params_mut(), &grads)?;

        let (val_loss, val_auc_pr) = if val_idx.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let val_logits = decoder.logits(&val_features)?;
            let loss = ce_loss(&val_logits, &val_classes, weights);
            let scores = softmax_illicit(&val_logits);
            let auc = eval::ScoredNodes::new(scores, val_illicit.clone())
                .and_then(|s| eval::auc_pr(&s))
                .unwrap_or(f64::NAN);
            (loss, auc)
        };
        log.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
            val_auc_pr,
        });
    }
    Ok((decoder, log))
}
