use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ndarray::Array2;

use amlnet_bench::{random_graph, random_scores};
use amlnet_core::embed::{generate_corpus, train_skipgram, WalkConfig, WalkKind};
use amlnet_core::eval::{auc_pr, auc_roc, ScoredNodes};
use amlnet_core::features::{betweenness, closeness, egonet_densities, pagerank};
use amlnet_core::fixture::{write_fixture, FixtureConfig};
use amlnet_core::gnn::{build_message_structure, train_gnn, GnnConfig, GnnKind};
use amlnet_core::graph::{load_elliptic, Label};

fn bench_load(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_fixture(
        dir.path(),
        &FixtureConfig {
            steps: 49,
            nodes_per_step: 100,
            ..FixtureConfig::default()
        },
    )
    .unwrap();
    c.bench_function("load_elliptic_4900_nodes", |b| {
        b.iter(|| {
            let loaded = load_elliptic(&paths.features, &paths.classes, &paths.edgelist).unwrap();
            black_box(loaded.0.num_edges())
        })
    });
}

fn bench_centralities(c: &mut Criterion) {
    let g = random_graph(5_000, 6_000, 1).undirected_view();
    c.bench_function("egonet_densities_5k", |b| {
        b.iter(|| black_box(egonet_densities(&g)))
    });
    c.bench_function("betweenness_5k_64_pivots", |b| {
        b.iter(|| black_box(betweenness(&g, 64, 7)))
    });
    c.bench_function("closeness_5k", |b| b.iter(|| black_box(closeness(&g))));

    let directed = random_graph(5_000, 6_000, 2);
    c.bench_function("pagerank_5k", |b| {
        b.iter(|| black_box(pagerank(&directed, 0.593, 1e-8, 10_000).unwrap()))
    });
}

fn bench_walks_and_skipgram(c: &mut Criterion) {
    let g = random_graph(2_000, 3_000, 3).undirected_view();
    let cfg = WalkConfig {
        walks_per_node: 1,
        walk_length: 9,
        window: 5,
        latent_dim: 16,
        p: 1.17,
        q: 1.6,
        negatives_per_positive: 1,
        epochs: 1,
        learning_rate: 0.05,
        seed: 4,
    };
    c.bench_function("node2vec_corpus_2k", |b| {
        b.iter(|| black_box(generate_corpus(&g, WalkKind::Node2vec, &cfg)))
    });
    let corpus = generate_corpus(&g, WalkKind::Node2vec, &cfg);
    c.bench_function("skipgram_epoch_2k", |b| {
        b.iter(|| black_box(train_skipgram(&corpus, 2_000, WalkKind::Node2vec, &cfg).unwrap()))
    });
}

fn bench_metrics(c: &mut Criterion) {
    let (scores, illicit) = random_scores(100_000, 0.1, 5);
    let scored = ScoredNodes::new(scores, illicit).unwrap();
    c.bench_function("auc_roc_100k", |b| {
        b.iter(|| black_box(auc_roc(&scored).unwrap()))
    });
    c.bench_function("auc_pr_100k", |b| {
        b.iter(|| black_box(auc_pr(&scored).unwrap()))
    });
}

fn bench_gnn_epoch(c: &mut Criterion) {
    let g = random_graph(2_000, 3_000, 6).undirected_view();
    let structure = build_message_structure(&g);
    let features = Array2::from_shape_fn((2_000, 32), |(i, j)| {
        ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.5
    });
    let labels: Vec<Label> = (0..2_000)
        .map(|i| {
            if i % 7 == 0 {
                Label::Illicit
            } else {
                Label::Licit
            }
        })
        .collect();
    let idx: Vec<u32> = (0..2_000).collect();
    let cfg = GnnConfig {
        kind: GnnKind::Gcn,
        latent_dim: 32,
        hidden_dim: 64,
        layers: 2,
        epochs: 1,
        learning_rate: 0.05,
        ..GnnConfig::default()
    };
    c.bench_function("gcn_epoch_2k_nodes", |b| {
        b.iter(|| black_box(train_gnn(&features, &labels, &idx, &[], &structure, &cfg).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_load,
    bench_centralities,
    bench_walks_and_skipgram,
    bench_metrics,
    bench_gnn_epoch
);
criterion_main!(benches);
