//! Benchmark orchestration: dataset ingestion, feature builds, method
//! training, tuning, evaluation and report emission, with every run
//! persisted for replication.

#![deny(unsafe_code)]

mod commands;
mod pipeline;
mod runcfg;

pub use commands::{
    cmd_benchmark_all, cmd_featurize, cmd_ingest, cmd_train_eval, cmd_tune, BenchmarkOutcome,
    TrainEvalOutput,
};
pub use pipeline::{evaluate_scores, run_method, Dataset, MethodRun};
pub use runcfg::{exit_code, parse_thresholds, RunConfig, ThresholdSpec};
