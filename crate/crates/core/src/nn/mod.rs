//! Minimal dense-tensor numeric core: reverse-mode autodiff, Adam, and the
//! MLP decoder used by the tabular methods.

pub mod adam;
pub mod checkpoint;
mod mlp;
mod tape;

pub use adam::{Adam, AdamConfig};
pub use mlp::{ce_loss, class_weights, train_decoder, DecoderConfig, MlpDecoder};
pub use tape::{CeTargets, Segments, SparseMatrix, Tape, Tensor};

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};

/// One row of a training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_auc_pr: f64,
}

/// `epoch,train_loss,val_loss,val_auc_pr` rows.
pub fn log_to_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,train_loss,val_loss,val_auc_pr\n");
    for row in log {
        out.push_str(&format!(
            "{},{:.8},{:.8},{:.8}\n",
            row.epoch, row.train_loss, row.val_loss, row.val_auc_pr
        ));
    }
    out
}

pub fn write_log_csv(path: &std::path::Path, log: &[EpochLog]) -> Result<()> {
    std::fs::write(path, log_to_csv(log)).map_err(|e| Error::io(path, e))
}

/// Glorot-style uniform init scaled by fan-in plus fan-out.
pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
}

/// Softmax probability of the illicit class (column 1) per row.
pub fn softmax_illicit(logits: &Array2<f64>) -> Vec<f64> {
    logits
        .rows()
        .into_iter()
        .map(|row| {
            let (z0, z1) = (row[0], row[1]);
            let m = z0.max(z1);
            let e0 = (z0 - m).exp();
            let e1 = (z1 - m).exp();
            e1 / (e0 + e1)
        })
        .collect()
}
