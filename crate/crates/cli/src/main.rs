use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use amlnet_cli::{
    cmd_benchmark_all, cmd_featurize, cmd_ingest, cmd_train_eval, cmd_tune, exit_code, RunConfig,
};
use amlnet_core::tune::Strategy;
use amlnet_core::{Error, Method, Result};

/// Benchmark harness for network-analytics methods on Elliptic-format
/// transaction graphs: manual graph features, random-walk embeddings and
/// graph neural networks under a shared temporal-split evaluation protocol.
#[derive(Parser)]
#[command(name = "amlnet", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Directory holding elliptic_txs_{features,classes,edgelist}.csv
    #[arg(long)]
    dataset_dir: PathBuf,

    /// Method: intrinsic, manual, deepwalk[-ni], node2vec[-ni], gcn,
    /// graphsage, gat, gin
    #[arg(long)]
    method: Option<String>,

    /// Run seed; all subsystem randomness derives from it
    #[arg(long)]
    seed: Option<u64>,

    /// Flat key-value run-config file (hyperparameters and run settings)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Intra-stage data-parallel workers (0 = auto)
    #[arg(long)]
    threads: Option<usize>,

    /// Top-k% thresholds, e.g. `0.1,1,10,p` (p = labelled-train prevalence)
    #[arg(long)]
    thresholds: Option<String>,

    /// Resampling repetitions for the variance protocol
    #[arg(long)]
    resamples: Option<usize>,
}

impl CommonArgs {
    fn resolve(&self, default_method: Option<Method>) -> Result<RunConfig> {
        // Defaults, then config file, then explicit flags.
        let method_placeholder = default_method.unwrap_or(Method::Intrinsic);
        let mut cfg = RunConfig::defaults(
            method_placeholder,
            self.dataset_dir.clone(),
            self.out.clone(),
        );
        if let Some(path) = &self.config {
            cfg.apply_config_file(path, true)?;
        }
        if let Some(name) = &self.method {
            let method: Method = name.parse()?;
            if method != cfg.method {
                cfg.method = method;
                cfg.params = method.tuned_defaults();
                if let Some(path) = &self.config {
                    cfg.apply_config_file(path, false)?;
                }
            }
        } else if self.config.is_none() && default_method.is_none() {
            return Err(Error::Config(
                "no method given: pass --method or a --config file with a method key".into(),
            ));
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(threads) = self.threads {
            cfg.threads = threads;
        }
        if let Some(thresholds) = &self.thresholds {
            cfg.thresholds = amlnet_cli::parse_thresholds(thresholds)?;
        }
        if let Some(resamples) = self.resamples {
            cfg.resamples = resamples;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load the dataset and write the ingestion manifest
    Ingest {
        #[arg(long)]
        dataset_dir: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compute and export feature tables (manual features, embeddings)
    Featurize {
        #[command(flatten)]
        common: CommonArgs,
        /// Restrict blocks: comma-separated `intrinsic,manual,embedding`
        #[arg(long)]
        features: Option<String>,
        /// Also dump the walk corpus (embedding methods)
        #[arg(long)]
        dump_walks: bool,
    },
    /// Train one method and evaluate it on the temporal test split
    TrainEval {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Hyperparameter search maximizing validation AUC-PR
    Tune {
        #[command(flatten)]
        common: CommonArgs,
        /// Trial budget (default: 50, GNNs 100)
        #[arg(long)]
        trials: Option<usize>,
        /// Search strategy: random or tpe
        #[arg(long, default_value = "random")]
        strategy: String,
    },
    /// Run every method and consolidate one row per method
    BenchmarkAll {
        #[command(flatten)]
        common: CommonArgs,
        /// Subset of methods, comma-separated (default: all ten)
        #[arg(long)]
        methods: Option<String>,
        /// Directory of per-method override files named `<method>.conf`
        #[arg(long)]
        configs_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { dataset_dir, out } => {
            cmd_ingest(&dataset_dir, &out)?;
        }
        Command::Featurize {
            common,
            features,
            dump_walks,
        } => {
            let mut cfg = common.resolve(None)?;
            cfg.dump_walks = dump_walks;
            cmd_featurize(&cfg, features.as_deref())?;
        }
        Command::TrainEval { common } => {
            let cfg = common.resolve(None)?;
            cmd_train_eval(&cfg, None)?;
        }
        Command::Tune {
            common,
            trials,
            strategy,
        } => {
            let cfg = common.resolve(None)?;
            let strategy: Strategy = strategy.parse()?;
            cmd_tune(&cfg, trials, strategy)?;
        }
        Command::BenchmarkAll {
            common,
            methods,
            configs_dir,
        } => {
            let template = common.resolve(Some(Method::Intrinsic))?;
            let methods: Vec<Method> = match methods {
                None => amlnet_core::method::ALL_METHODS.to_vec(),
                Some(list) => list
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse())
                    .collect::<Result<_>>()?,
            };
            cmd_benchmark_all(
                &template,
                &methods,
                common.config.as_deref(),
                configs_dir.as_deref(),
                None,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else is a
            // usage error (exit code 1).
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
