//! Full-graph training loop with masked cross-entropy.

use std::rc::Rc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::eval;
use crate::gnn::{sample_neighbors, ForwardCtx, GnnConfig, GnnKind, GnnModel, MessageStructure};
use crate::graph::{Label, SplitMasks};
use crate::nn::adam::{Adam, AdamConfig};
use crate::nn::{class_weights, CeTargets, EpochLog, Tape};
use crate::rng;

/// Supervised node indices for one split mask.
pub fn train_indices(masks: &SplitMasks, mask: &[bool]) -> Vec<u32> {
    masks.supervised_indices(mask)
}

/// Trains end-to-end: full-graph forward per epoch (neighbor-sampled for
/// GraphSAGE), masked cross-entropy on labelled training nodes, dropout in
/// training only. Logs train loss, validation loss and validation AUC-PR per
/// epoch.
pub fn train_gnn(
    features: &Array2<f64>,
    labels: &[Label],
    train_idx: &[u32],
    val_idx: &[u32],
    structure: &MessageStructure,
    cfg: &GnnConfig,
) -> Result<(GnnModel, Vec<EpochLog>)> {
    if train_idx.is_empty() {
        return Err(Error::EmptyMask);
    }
    if features.dim().0 != structure.num_nodes {
        return Err(Error::Shape {
            context: "train_gnn",
            expected: format!("{} feature rows", structure.num_nodes),
            actual: format!("{}", features.dim().0),
        });
    }

    let weights = class_weights(labels, train_idx, cfg.balanced_class_weights);
    let targets = Rc::new(CeTargets {
        rows: train_idx.to_vec(),
        classes: train_idx
            .iter()
            .map(|&i| u8::from(labels[i as usize] == Label::Illicit))
            .collect(),
        weights,
    });
    let val_classes: Vec<u8> = val_idx
        .iter()
        .map(|&i| u8::from(labels[i as usize] == Label::Illicit))
        .collect();
    let val_illicit: Vec<bool> = val_classes.iter().map(|&c| c == 1).collect();

    let mut model = GnnModel::new(cfg, features.dim().1, cfg.seed);
    let mut adam = Adam::new(
        AdamConfig::with_lr(cfg.learning_rate),
        &model.param_shapes(),
    );

    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let sage_samples = if cfg.kind == GnnKind::GraphSage {
            (0..model.layers.len())
                .map(|l| {
                    let mut rng =
                        rng::stream_tagged(cfg.seed, "sage-sample", &[epoch as u64, l as u64]);
                    sample_neighbors(structure, cfg.sample_size, &mut rng)
                })
                .collect()
        } else {
            Vec::new()
        };
        let mut dropout_rng = rng::stream_tagged(cfg.seed, "dropout", &[epoch as u64]);

        let mut tape = Tape::new();
        let x = tape.leaf(features.clone());
        let mut ctx = ForwardCtx {
            structure,
            sage_samples: &sage_samples,
            dropout: cfg.dropout,
            dropout_rng: Some(&mut dropout_rng),
        };
        let (logits, params) = model.forward(&mut tape, x, &mut ctx)?;
        let loss = tape.masked_cross_entropy(logits, Rc::clone(&targets))?;
        let train_loss = tape.value(loss)[(0, 0)];
        if !train_loss.is_finite() {
            return Err(Error::NanLoss {
                epoch,
                details: format!("{:?} training loss", cfg.kind),
            });
        }
        tape.backward(loss)?;
        let grads: Vec<Array2<f64>> = params
            .iter()
            .map(|&p| tape.take_grad(p).expect("parameter on loss path"))
            .collect();
        drop(tape);
        adam.step(&mut model.params_mut(), &grads)?;

        let (val_loss, val_auc_pr) = if val_idx.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let logits = model.logits(features, structure)?;
            let mut val_logits = Array2::zeros((val_idx.len(), 2));
            for (k, &i) in val_idx.iter().enumerate() {
                val_logits.row_mut(k).assign(&logits.row(i as usize));
            }
            let loss = crate::nn::ce_loss(&val_logits, &val_classes, weights);
            let scores = crate::nn::softmax_illicit(&val_logits);
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
    Ok((model, log))
}
