//! The five CLI operations: ingest, featurize, train-eval, tune and
//! benchmark-all. Every training run persists a replayable directory:
//! `runs/<timestamp>-<method>/{config, manifest, metrics.csv, log.csv,
//! checkpoint}`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use amlnet_core::embed::{generate_corpus, train_skipgram, WalkKind};
use amlnet_core::eval::EvalReport;
use amlnet_core::features::{compute_manual_features, ManualFeatureConfig};
use amlnet_core::graph::DatasetManifest;
use amlnet_core::nn::{checkpoint, log_to_csv};
use amlnet_core::tune::{run_search, write_trials_jsonl, Strategy};
use amlnet_core::{rng, Error, Method, Result};

use crate::pipeline::{
    assemble_features, default_blocks, evaluate_scores, run_method, sha256_hex, test_curves,
    validation_auc_pr, walk_config, Dataset, FeatureBlock, MethodRun,
};
use crate::runcfg::RunConfig;

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn timestamp() -> String {
    chrono::Local::now().format("%Y%m%d-%H%M%S").to_string()
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {}", e)))
}

fn method_seed(cfg: &RunConfig) -> u64 {
    rng::derive(
        cfg.seed,
        &[rng::label("method"), rng::label(cfg.method.name())],
    )
}

/// Loads the dataset and writes the ingestion manifest.
pub fn cmd_ingest(dataset_dir: &Path, out_dir: &Path) -> Result<DatasetManifest> {
    let dataset = Dataset::load(dataset_dir)?;
    let manifest = dataset.manifest.clone();
    write_file(&out_dir.join("manifest"), &manifest.to_kv())?;
    println!("{}", manifest.to_kv().trim_end());
    println!("manifest_sha256 = {}", dataset.manifest_sha256());
    if manifest.matches_canonical_elliptic() {
        println!("dataset matches the canonical Elliptic release");
    }
    Ok(manifest)
}

/// Builds and exports the method's feature table. `blocks_override` narrows
/// the selection (comma-separated `intrinsic,manual,embedding`); an empty
/// override is an error.
pub fn cmd_featurize(cfg: &RunConfig, blocks_override: Option<&str>) -> Result<PathBuf> {
    let blocks = match blocks_override {
        None => default_blocks(cfg.method),
        Some(list) => parse_blocks(list)?,
    };
    if blocks.is_empty() {
        return Err(Error::Config("empty feature selection".into()));
    }
    let dataset = Dataset::load(&cfg.dataset_dir)?;
    let pool = thread_pool(cfg.threads)?;
    let seed = method_seed(cfg);

    let dir = cfg.out_dir.join("features").join(cfg.method.name());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let (features, names, _) = pool.install(|| assemble_features(&dataset, cfg, seed, &blocks))?;

    // The concatenated feature table fed to the decoder.
    let mut out = String::from("node_id");
    for name in &names {
        let _ = write!(out, ",{}", name);
    }
    out.push('\n');
    for (v, row) in features.rows().into_iter().enumerate() {
        let _ = write!(out, "{}", dataset.graph.external_id(v as u32));
        for value in row {
            let _ = write!(out, ",{}", value);
        }
        out.push('\n');
    }
    write_file(&dir.join("features.csv"), &out)?;
    write_file(&dir.join("columns"), &(names.join("\n") + "\n"))?;

    if blocks.contains(&FeatureBlock::Manual) {
        let manual_cfg = ManualFeatureConfig {
            betweenness_samples: cfg.betweenness_pivots,
            seed: rng::derive(seed, &[rng::label("manual-features")]),
            pagerank_alpha: cfg.params.get_real("alpha").unwrap_or(0.593),
            per_period: cfg.per_period_centralities,
            ..ManualFeatureConfig::default()
        };
        let manual = pool.install(|| {
            compute_manual_features(&dataset.graph, &dataset.undirected, &manual_cfg)
        })?;
        manual.write_csv(
            &dir.join("manual_features.csv"),
            dataset.graph.external_ids(),
        )?;
    }

    if blocks.contains(&FeatureBlock::Embedding) {
        let kind = match cfg.method {
            Method::Node2vec | Method::Node2vecNi => WalkKind::Node2vec,
            _ => WalkKind::DeepWalk,
        };
        // Streams match the training path, so the export equals what the
        // decoder consumed.
        let walk_cfg = walk_config(&cfg.params, kind, seed)?;
        let corpus = generate_corpus(&dataset.undirected, kind, &walk_cfg);
        let embedding = train_skipgram(&corpus, dataset.graph.num_nodes(), kind, &walk_cfg)?;
        embedding.write_csv(&dir.join("embedding.csv"), dataset.graph.external_ids())?;
        if cfg.dump_walks {
            amlnet_core::embed::write_walks(
                &dir.join("walks.txt"),
                &corpus,
                dataset.graph.external_ids(),
            )?;
        }
    }

    println!(
        "featurize {}: {} columns for {} nodes -> {}",
        cfg.method,
        names.len(),
        features.dim().0,
        dir.display()
    );
    Ok(dir)
}

fn parse_blocks(list: &str) -> Result<Vec<FeatureBlock>> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(match part {
            "intrinsic" => FeatureBlock::Intrinsic,
            "manual" => FeatureBlock::Manual,
            "embedding" => FeatureBlock::Embedding,
            other => return Err(Error::Config(format!("unknown feature block {:?}", other))),
        });
    }
    Ok(out)
}

pub struct TrainEvalOutput {
    pub report: EvalReport,
    pub run_dir: PathBuf,
}

/// Trains the configured method, evaluates it with the matching variance
/// protocol and persists the run directory.
pub fn cmd_train_eval(cfg: &RunConfig, run_dir: Option<PathBuf>) -> Result<TrainEvalOutput> {
    let dataset = Dataset::load(&cfg.dataset_dir)?;
    let pool = thread_pool(cfg.threads)?;
    pool.install(|| train_eval_on(&dataset, cfg, run_dir))
}

/// Same as [`cmd_train_eval`] with a pre-loaded dataset (benchmark-all
/// reuses one load across methods).
pub fn train_eval_on(
    dataset: &Dataset,
    cfg: &RunConfig,
    run_dir: Option<PathBuf>,
) -> Result<TrainEvalOutput> {
    let run = run_method(dataset, cfg)?;
    let report = evaluate_scores(dataset, cfg, &run.scores)?;

    let run_dir = run_dir.unwrap_or_else(|| {
        cfg.out_dir
            .join("runs")
            .join(format!("{}-{}", timestamp(), cfg.method))
    });
    persist_run(dataset, cfg, &run, &report, &run_dir)?;

    for note in &report.notes {
        println!("note: {}", note);
    }
    println!("{}", render_report(cfg.method.name(), &report));
    println!("run directory: {}", run_dir.display());
    Ok(TrainEvalOutput { report, run_dir })
}

/// Hyperparameter search maximizing validation AUC-PR; writes the trial
/// ledger and the best configuration as a reusable run-config file.
pub fn cmd_tune(cfg: &RunConfig, trials: Option<usize>, strategy: Strategy) -> Result<PathBuf> {
    let dataset = Dataset::load(&cfg.dataset_dir)?;
    let pool = thread_pool(cfg.threads)?;
    let budget = trials.unwrap_or_else(|| cfg.method.trial_budget());
    let space = cfg.method.search_space();

    let result = pool.install(|| {
        run_search(&space, budget, strategy, cfg.seed, |params, trial_seed| {
            let mut trial_cfg = cfg.clone();
            trial_cfg.seed = trial_seed;
            trial_cfg.params = cfg.params.merged_with(params);
            let run = run_method(&dataset, &trial_cfg)?;
            validation_auc_pr(&dataset, &run.scores)
        })
    })?;

    let dir = cfg.out_dir.join("tune").join(cfg.method.name());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_trials_jsonl(&dir.join("trials.jsonl"), &result.records)?;

    let best_path = dir.join("best.conf");
    let mut best = String::new();
    let _ = writeln!(best, "method = {}", cfg.method);
    best.push_str(&cfg.params.merged_with(&result.best).to_kv());
    write_file(&best_path, &best)?;

    println!(
        "tune {}: best trial {} with validation AUC-PR {:.4} over {} trials",
        cfg.method, result.best_trial_id, result.best_objective, budget
    );
    println!("best config: {}", best_path.display());
    Ok(best_path)
}

pub struct BenchmarkOutcome {
    pub dir: PathBuf,
    pub rows: Vec<(Method, std::result::Result<EvalReport, String>)>,
}

/// Runs every requested method with its tuned defaults (plus overrides),
/// consolidating one row per method. A failing method marks its row failed
/// and the sweep continues.
pub fn cmd_benchmark_all(
    template: &RunConfig,
    methods: &[Method],
    global_config: Option<&Path>,
    configs_dir: Option<&Path>,
    bench_dir: Option<PathBuf>,
) -> Result<BenchmarkOutcome> {
    let dataset = Dataset::load(&template.dataset_dir)?;
    let pool = thread_pool(template.threads)?;
    let dir = bench_dir.unwrap_or_else(|| template.out_dir.join("benchmark").join(timestamp()));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut rows = Vec::with_capacity(methods.len());
    let mut consolidated = String::from("method,metric,mean,std\n");
    let mut status = String::from("method,status\n");

    for &method in methods {
        let mut cfg = template.clone();
        cfg.method = method;
        cfg.params = method.tuned_defaults();
        if let Some(path) = global_config {
            cfg.apply_config_file(path, false)?;
        }
        if let Some(configs) = configs_dir {
            let per_method = configs.join(format!("{}.conf", method.name()));
            if per_method.exists() {
                cfg.apply_config_file(&per_method, false)?;
            }
        }

        let run_dir = dir.join(method.name());
        let outcome = pool.install(|| {
            let run = run_method(&dataset, &cfg)?;
            let report = evaluate_scores(&dataset, &cfg, &run.scores)?;
            let (roc, pr) = test_curves(&dataset, &run.scores)?;
            persist_run(&dataset, &cfg, &run, &report, &run_dir)?;
            write_curves(&run_dir, &roc, &pr)?;
            Ok::<_, Error>(report)
        });
        match outcome {
            Ok(report) => {
                for row in &report.rows {
                    let _ = writeln!(
                        consolidated,
                        "{},{},{:.6},{:.6}",
                        method.name(),
                        row.metric,
                        row.mean,
                        row.std
                    );
                }
                let _ = writeln!(status, "{},ok", method.name());
                rows.push((method, Ok(report)));
            }
            Err(e) => {
                eprintln!("benchmark: {} failed: {}", method.name(), e);
                let _ = writeln!(status, "{},failed", method.name());
                rows.push((method, Err(e.to_string())));
            }
        }
    }

    write_file(&dir.join("consolidated.csv"), &consolidated)?;
    write_file(&dir.join("status.csv"), &status)?;
    println!("{}", render_benchmark_table(&rows));
    println!("benchmark directory: {}", dir.display());
    Ok(BenchmarkOutcome { dir, rows })
}

fn persist_run(
    dataset: &Dataset,
    cfg: &RunConfig,
    run: &MethodRun,
    report: &EvalReport,
    run_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(run_dir).map_err(|e| Error::io(run_dir, e))?;
    let columns_sha = if run.column_names.is_empty() {
        String::new()
    } else {
        sha256_hex(run.column_names.join(",").as_bytes())
    };
    write_file(
        &run_dir.join("config"),
        &cfg.to_kv(&dataset.manifest_sha256(), &columns_sha),
    )?;
    write_file(&run_dir.join("manifest"), &dataset.manifest.to_kv())?;
    write_file(
        &run_dir.join("metrics.csv"),
        &report.to_csv(cfg.method.name()),
    )?;
    write_file(&run_dir.join("log.csv"), &log_to_csv(&run.log))?;
    let named: Vec<(String, &ndarray::Array2<f64>)> =
        run.checkpoint.iter().map(|(n, t)| (n.clone(), t)).collect();
    checkpoint::save_named(&run_dir.join("checkpoint"), &named)
}

fn write_curves(run_dir: &Path, roc: &[(f64, f64)], pr: &[(f64, f64)]) -> Result<()> {
    let mut roc_csv = String::from("fpr,tpr\n");
    for (x, y) in roc {
        let _ = writeln!(roc_csv, "{},{}", x, y);
    }
    let mut pr_csv = String::from("recall,precision\n");
    for (x, y) in pr {
        let _ = writeln!(pr_csv, "{},{}", x, y);
    }
    write_file(&run_dir.join("roc_curve.csv"), &roc_csv)?;
    write_file(&run_dir.join("pr_curve.csv"), &pr_csv)
}

/// Table-style rendering of one report: metric, mean +/- std.
pub fn render_report(method: &str, report: &EvalReport) -> String {
    let mut out = format!("{:<12} {:>20} {:>20}\n", "method", "metric", "value");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{:<12} {:>20} {:>11.4} \u{00b1} {:.4}",
            method, row.metric, row.mean, row.std
        );
    }
    out
}

fn render_benchmark_table(rows: &[(Method, std::result::Result<EvalReport, String>)]) -> String {
    let mut out = format!("{:<14} {:>20} {:>20}\n", "method", "AUC-ROC", "AUC-PR");
    for (method, outcome) in rows {
        match outcome {
            Ok(report) => {
                let fmt = |name: &str| {
                    report
                        .get(name)
                        .map(|m| format!("{:.4} \u{00b1} {:.4}", m.mean, m.std))
                        .unwrap_or_else(|| "-".to_string())
                };
                let _ = writeln!(
                    out,
                    "{:<14} {:>20} {:>20}",
                    method.name(),
                    fmt("auc_roc"),
                    fmt("auc_pr")
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{:<14} failed: {}", method.name(), e);
            }
        }
    }
    out
}
