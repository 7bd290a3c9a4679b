//! Dataset loading and per-method training/scoring.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use sha2::{Digest, Sha256};

use amlnet_core::embed::{generate_corpus, train_skipgram, WalkConfig, WalkKind};
use amlnet_core::eval::{self, EvalReport, ScoredNodes};
use amlnet_core::features::{compute_manual_features, ManualFeatureConfig, MANUAL_FEATURE_COLUMNS};
use amlnet_core::gnn::{
    build_message_structure, train_gnn, Aggregator, GnnConfig, GnnKind, MessageStructure,
};
use amlnet_core::graph::{
    load_elliptic, make_splits, DatasetManifest, NodeTable, SplitCounts, SplitMasks,
    TransactionGraph,
};
use amlnet_core::nn::{train_decoder, DecoderConfig, EpochLog};
use amlnet_core::tune::TrialConfig;
use amlnet_core::{rng, Error, Method, Result};

use crate::runcfg::{RunConfig, ThresholdSpec};

/// Loaded dataset plus everything derived from it that every method shares.
pub struct Dataset {
    pub graph: TransactionGraph,
    pub undirected: TransactionGraph,
    pub table: NodeTable,
    pub masks: SplitMasks,
    pub counts: SplitCounts,
    pub manifest: DatasetManifest,
}

impl Dataset {
    pub fn paths(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
        (
            dir.join("elliptic_txs_features.csv"),
            dir.join("elliptic_txs_classes.csv"),
            dir.join("elliptic_txs_edgelist.csv"),
        )
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let (features, classes, edges) = Self::paths(dir);
        let (graph, table) = load_elliptic(&features, &classes, &edges)?;
        let undirected = graph.undirected_view();
        let (masks, counts) = make_splits(&graph, &table)?;
        let manifest = DatasetManifest::new(&graph, &undirected, &table, counts);
        Ok(Dataset {
            graph,
            undirected,
            table,
            masks,
            counts,
            manifest,
        })
    }

    /// Labelled-train illicit prevalence in percent (the default p% threshold).
    pub fn prevalence_percent(&self) -> f64 {
        let train_idx = self.masks.supervised_indices(&self.masks.train);
        let illicit = train_idx
            .iter()
            .filter(|&&i| self.table.labels[i as usize] == amlnet_core::graph::Label::Illicit)
            .count();
        100.0 * illicit as f64 / train_idx.len().max(1) as f64
    }

    pub fn manifest_sha256(&self) -> String {
        sha256_hex(self.manifest.to_kv().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}

/// A trained method: per-node illicit scores plus artifacts for persistence.
pub struct MethodRun {
    pub method: Method,
    pub scores: Vec<f64>,
    pub log: Vec<EpochLog>,
    pub checkpoint: Vec<(String, Array2<f64>)>,
    /// Feature column names in concatenation order (tabular methods).
    pub column_names: Vec<String>,
}

fn method_seed(cfg: &RunConfig) -> u64 {
    rng::derive(
        cfg.seed,
        &[rng::label("method"), rng::label(cfg.method.name())],
    )
}

/// Trains the configured method end-to-end and scores every node.
pub fn run_method(dataset: &Dataset, cfg: &RunConfig) -> Result<MethodRun> {
    let seed = method_seed(cfg);
    if cfg.method.is_gnn() {
        run_gnn_method(dataset, cfg, seed)
    } else {
        run_tabular_method(dataset, cfg, seed)
    }
}

/// Builds the tabular feature table `[intrinsic || manual || embedding]` as
/// selected, with column names and any learned artifacts worth persisting.
#[allow(clippy::type_complexity)]
pub fn assemble_features(
    dataset: &Dataset,
    cfg: &RunConfig,
    seed: u64,
    blocks: &[FeatureBlock],
) -> Result<(Array2<f64>, Vec<String>, Vec<(String, Array2<f64>)>)> {
    if blocks.is_empty() {
        return Err(Error::Config("empty feature selection".into()));
    }
    let mut parts: Vec<Array2<f64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut artifacts: Vec<(String, Array2<f64>)> = Vec::new();

    for block in blocks {
        match block {
            FeatureBlock::Intrinsic => {
                parts.push(dataset.table.intrinsic_features());
                names.extend((0..dataset.table.local.dim().1).map(|c| format!("local_{}", c)));
                names.extend((0..dataset.table.aggregated.dim().1).map(|c| format!("agg_{}", c)));
            }
            FeatureBlock::Manual => {
                let manual_cfg = ManualFeatureConfig {
                    betweenness_samples: cfg.betweenness_pivots,
                    seed: rng::derive(seed, &[rng::label("manual-features")]),
                    pagerank_alpha: cfg.params.get_real("alpha").unwrap_or(0.593),
                    per_period: cfg.per_period_centralities,
                    ..ManualFeatureConfig::default()
                };
                let manual =
                    compute_manual_features(&dataset.graph, &dataset.undirected, &manual_cfg)?;
                parts.push(manual.to_matrix());
                names.extend(MANUAL_FEATURE_COLUMNS.iter().map(|s| s.to_string()));
            }
            FeatureBlock::Embedding => {
                let kind = match cfg.method {
                    Method::Node2vec | Method::Node2vecNi => WalkKind::Node2vec,
                    _ => WalkKind::DeepWalk,
                };
                let walk_cfg = walk_config(&cfg.params, kind, seed)?;
                let corpus = generate_corpus(&dataset.undirected, kind, &walk_cfg);
                let embedding =
                    train_skipgram(&corpus, dataset.graph.num_nodes(), kind, &walk_cfg)?;
                names.extend((0..embedding.dim()).map(|d| format!("e{}", d)));
                artifacts.push(("embedding".to_string(), embedding.vectors.clone()));
                parts.push(embedding.vectors);
            }
        }
    }

    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    let features = ndarray::concatenate(ndarray::Axis(1), &views).expect("equal row counts");
    Ok((features, names, artifacts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureBlock {
    Intrinsic,
    Manual,
    Embedding,
}

/// The feature blocks a method consumes, in concatenation order.
pub fn default_blocks(method: Method) -> Vec<FeatureBlock> {
    let mut blocks = Vec::new();
    if method.uses_intrinsic() && !method.is_gnn() {
        blocks.push(FeatureBlock::Intrinsic);
    }
    if method == Method::Manual {
        blocks.push(FeatureBlock::Manual);
    }
    if method.is_embedding() {
        blocks.push(FeatureBlock::Embedding);
    }
    blocks
}

fn run_tabular_method(dataset: &Dataset, cfg: &RunConfig, seed: u64) -> Result<MethodRun> {
    let blocks = default_blocks(cfg.method);
    let (features, column_names, artifacts) = assemble_features(dataset, cfg, seed, &blocks)?;

    let decoder_cfg = DecoderConfig {
        hidden_layers: cfg.params.get_int("decoder_layers")? as usize,
        hidden_dim: cfg.params.get_int("decoder_hidden_dim")? as usize,
        epochs: cfg.params.get_int("decoder_epochs")? as usize,
        learning_rate: cfg.params.get_real("learning_rate")?,
        balanced_class_weights: cfg.balanced_class_weights,
        seed: rng::derive(seed, &[rng::label("decoder")]),
    };
    let train_idx = dataset.masks.supervised_indices(&dataset.masks.train);
    let val_idx = dataset.masks.supervised_indices(&dataset.masks.val);
    let (decoder, log) = train_decoder(
        &features,
        &dataset.table.labels,
        &train_idx,
        &val_idx,
        &decoder_cfg,
    )?;
    let scores = decoder.scores(&features)?;

    let mut checkpoint: Vec<(String, Array2<f64>)> = decoder
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.clone()))
        .collect();
    checkpoint.extend(artifacts);

    Ok(MethodRun {
        method: cfg.method,
        scores,
        log,
        checkpoint,
        column_names,
    })
}

fn run_gnn_method(dataset: &Dataset, cfg: &RunConfig, seed: u64) -> Result<MethodRun> {
    let gnn_cfg = gnn_config(cfg, seed)?;
    let structure: MessageStructure = if cfg.directed_mp {
        build_message_structure(&dataset.graph)
    } else {
        build_message_structure(&dataset.undirected)
    };
    // GNN input is the 94 local features only.
    let features = dataset.table.local.clone();
    let train_idx = dataset.masks.supervised_indices(&dataset.masks.train);
    let val_idx = dataset.masks.supervised_indices(&dataset.masks.val);
    let (model, log) = train_gnn(
        &features,
        &dataset.table.labels,
        &train_idx,
        &val_idx,
        &structure,
        &gnn_cfg,
    )?;
    let scores = model.scores(&features, &structure)?;
    let checkpoint = model
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.clone()))
        .collect();
    Ok(MethodRun {
        method: cfg.method,
        scores,
        log,
        checkpoint,
        column_names: (0..features.dim().1)
            .map(|c| format!("local_{}", c))
            .collect(),
    })
}

pub(crate) fn walk_config(params: &TrialConfig, kind: WalkKind, seed: u64) -> Result<WalkConfig> {
    let mut cfg = WalkConfig {
        walks_per_node: params.get_int("walks_per_node")? as usize,
        walk_length: params.get_int("walk_length")? as usize,
        window: params.get_int("context_window_size")? as usize,
        latent_dim: params.get_int("latent_dim")? as usize,
        negatives_per_positive: params.get_int("negative_samples")? as usize,
        epochs: params.get_int("epochs")? as usize,
        learning_rate: params.get_real("learning_rate")?,
        seed: rng::derive(seed, &[rng::label("embed")]),
        ..WalkConfig::default()
    };
    if kind == WalkKind::Node2vec {
        cfg.p = params.get_real("p")?;
        cfg.q = params.get_real("q")?;
    }
    Ok(cfg)
}

fn gnn_config(cfg: &RunConfig, seed: u64) -> Result<GnnConfig> {
    let params = &cfg.params;
    let kind = match cfg.method {
        Method::Gcn => GnnKind::Gcn,
        Method::GraphSage => GnnKind::GraphSage,
        Method::Gat => GnnKind::Gat,
        Method::Gin => GnnKind::Gin,
        other => return Err(Error::Config(format!("{} is not a GNN method", other))),
    };
    let latent = params.get_int("latent_dim")? as usize;
    let hidden = if params.contains("gnn_hidden_dim") {
        params.get_int("gnn_hidden_dim")? as usize
    } else {
        latent
    };
    let aggregator: Aggregator = if params.contains("aggregator") {
        params.get_str("aggregator")?.parse()?
    } else {
        Aggregator::Max
    };
    Ok(GnnConfig {
        kind,
        latent_dim: latent,
        hidden_dim: hidden,
        layers: params.get_int("gnn_layers")? as usize,
        dropout: params.get_real("dropout_rate")?,
        learning_rate: params.get_real("learning_rate")?,
        epochs: params.get_int("epochs")? as usize,
        sample_size: if params.contains("neighbourhood_samples") {
            params.get_int("neighbourhood_samples")? as usize
        } else {
            2
        },
        heads: if params.contains("heads") {
            params.get_int("heads")? as usize
        } else {
            1
        },
        aggregator,
        directed_mp: cfg.directed_mp,
        balanced_class_weights: cfg.balanced_class_weights,
        leaky_slope: 0.2,
        seed: rng::derive(seed, &[rng::label("gnn")]),
    })
}

/// Resolves thresholds (the `p` token becomes the labelled-train prevalence)
/// and runs the method-matching variance protocol: bootstrap for tabular
/// decoders, test-mask halving for GNNs.
pub fn evaluate_scores(dataset: &Dataset, cfg: &RunConfig, scores: &[f64]) -> Result<EvalReport> {
    let thresholds: Vec<f64> = cfg
        .thresholds
        .iter()
        .map(|t| match t {
            ThresholdSpec::Percent(v) => *v,
            ThresholdSpec::Prevalence => dataset.prevalence_percent(),
        })
        .collect();
    let test_idx = dataset.masks.supervised_indices(&dataset.masks.test);
    let scored = ScoredNodes::from_labels(scores, &dataset.table.labels, &test_idx)?;
    let eval_seed = rng::derive(
        cfg.seed,
        &[rng::label("eval"), rng::label(cfg.method.name())],
    );
    if cfg.method.is_gnn() {
        eval::mask_halving_report(&scored, &thresholds, cfg.resamples, eval_seed)
    } else {
        eval::bootstrap_report(&scored, &thresholds, cfg.resamples, eval_seed)
    }
}

/// Validation AUC-PR of a score vector, the tuning objective.
pub fn validation_auc_pr(dataset: &Dataset, scores: &[f64]) -> Result<f64> {
    let val_idx = dataset.masks.supervised_indices(&dataset.masks.val);
    let scored = ScoredNodes::from_labels(scores, &dataset.table.labels, &val_idx)?;
    eval::auc_pr(&scored)
}

/// Test-set ROC and PR curves for plot-ready export.
pub fn test_curves(
    dataset: &Dataset,
    scores: &[f64],
) -> Result<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let test_idx = dataset.masks.supervised_indices(&dataset.masks.test);
    let scored = ScoredNodes::from_labels(scores, &dataset.table.labels, &test_idx)?;
    Ok((eval::roc_curve(&scored), eval::pr_curve(&scored)))
}
