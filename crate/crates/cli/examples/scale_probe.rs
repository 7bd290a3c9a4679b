//! Canonical-scale smoke probe: times loading and one training run on a
//! synthetic dataset of the same size. Usage:
//!   scale_probe [method] [epochs]

use amlnet_cli::{Dataset, RunConfig};
use amlnet_core::tune::ParamValue;
use amlnet_core::Method;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dir = std::path::PathBuf::from("/tmp/scale-elliptic");
    if !dir.join("elliptic_txs_features.csv").exists() {
        std::fs::create_dir_all(&dir).unwrap();
        let t0 = std::time::Instant::now();
        amlnet_core::fixture::write_fixture(
            &dir,
            &amlnet_core::fixture::FixtureConfig {
                steps: 49,
                nodes_per_step: 4159,
                edges_per_node: 1.15,
                seed: 0,
                ..Default::default()
            },
        )
        .unwrap();
        println!("fixture written in {:.1}s", t0.elapsed().as_secs_f64());
    }

    let t1 = std::time::Instant::now();
    let dataset = Dataset::load(&dir).unwrap();
    println!(
        "load: {:.1}s ({} nodes, {} edges)",
        t1.elapsed().as_secs_f64(),
        dataset.manifest.nodes,
        dataset.manifest.edges
    );

    if let Some(name) = args.get(1) {
        let method: Method = name.parse().unwrap();
        let mut cfg = RunConfig::defaults(method, dir, "/tmp/scale-out".into());
        if let Some(epochs) = args.get(2) {
            let epochs: i64 = epochs.parse().unwrap();
            if cfg.params.contains("epochs") {
                cfg.params.set("epochs", ParamValue::Int(epochs));
            }
            if cfg.params.contains("decoder_epochs") {
                cfg.params.set("decoder_epochs", ParamValue::Int(epochs));
            }
        }
        let t2 = std::time::Instant::now();
        let run = amlnet_cli::run_method(&dataset, &cfg).unwrap();
        println!("train {}: {:.1}s", name, t2.elapsed().as_secs_f64());
        let t3 = std::time::Instant::now();
        let report = amlnet_cli::evaluate_scores(&dataset, &cfg, &run.scores).unwrap();
        println!(
            "evaluate: {:.1}s (auc_pr {:.4})",
            t3.elapsed().as_secs_f64(),
            report.get("auc_pr").unwrap().mean
        );
    }
}
