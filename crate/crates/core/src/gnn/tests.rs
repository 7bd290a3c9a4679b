use super::*;
use crate::graph::{Label, TransactionGraph};
use crate::nn::Tape;
use crate::testutil::{check_gradients, rand_matrix, FD_EPS, FD_TOL};
use ndarray::{array, Array2};
use rand::Rng as _;
use std::collections::HashMap;
use std::rc::Rc;

fn graph(n: usize, edges: &[(u32, u32)]) -> TransactionGraph {
    let external: Vec<u64> = (0..n as u64).collect();
    let index: HashMap<u64, u32> = external.iter().map(|&e| (e, e as u32)).collect();
    TransactionGraph::from_parts(edges, vec![1; n], external, index)
}

fn undirected_structure(n: usize, edges: &[(u32, u32)]) -> MessageStructure {
    build_message_structure(&graph(n, edges).undirected_view())
}

fn identity(n: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |(i, j)| f64::from(i == j))
}

// ---------------------------------------------------------------------------
// GCN
// ---------------------------------------------------------------------------

#[test]
fn gcn_isolated_node_with_self_loop_is_identity() {
    let s = undirected_structure(1, &[]);
    let layer = GcnLayer {
        weight: identity(2),
    };
    let mut tape = Tape::new();
    let h = tape.leaf(array![[3.0, -4.0]]);
    let (out, _) = layer.forward_on(&mut tape, h, &s.gcn_norm, false).unwrap();
    assert_eq!(tape.value(out), &array![[3.0, -4.0]]);
}

#[test]
fn gcn_two_node_propagation_averages_with_self() {
    // Both nodes have degree 2 in A + I, every coefficient is 1/2.
    let s = undirected_structure(2, &[(0, 1)]);
    let layer = GcnLayer {
        weight: identity(2),
    };
    let mut tape = Tape::new();
    let h = tape.leaf(array![[1.0, 0.0], [0.0, 1.0]]);
    let (out, _) = layer.forward_on(&mut tape, h, &s.gcn_norm, false).unwrap();
    assert_eq!(tape.value(out), &array![[0.5, 0.5], [0.5, 0.5]]);
}

#[test]
fn gcn_normalization_is_symmetric() {
    let s = undirected_structure(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (4, 5)]);
    let sp = &s.gcn_norm;
    let mut coeff: HashMap<(u32, u32), f64> = HashMap::new();
    for i in 0..sp.num_rows() {
        for k in sp.offsets[i]..sp.offsets[i + 1] {
            coeff.insert((i as u32, sp.cols[k]), sp.vals[k]);
        }
    }
    for (&(i, j), &v) in &coeff {
        assert_eq!(coeff[&(j, i)], v, "coefficient ({}, {})", i, j);
        assert!(v > 0.0 && v.is_finite());
    }
}

// ---------------------------------------------------------------------------
// GraphSAGE
// ---------------------------------------------------------------------------

/// Weight selecting the aggregated half of `[self || aggregated]`.
fn neighbor_selector(dim: usize) -> Array2<f64> {
    let mut w = Array2::zeros((2 * dim, dim));
    for d in 0..dim {
        w[(dim + d, d)] = 1.0;
    }
    w
}

fn sage_aggregate(
    aggregator: Aggregator,
    n: usize,
    edges: &[(u32, u32)],
    h: Array2<f64>,
) -> Array2<f64> {
    let s = undirected_structure(n, edges);
    let layer = SageLayer {
        weight: neighbor_selector(h.dim().1),
    };
    let mut rng = crate::rng::stream_tagged(0, "sage-test", &[]);
    let sampled = sample_neighbors(&s, 5, &mut rng);
    let mut tape = Tape::new();
    let ht = tape.leaf(h);
    let (out, _) = layer
        .forward_on(&mut tape, ht, &sampled, aggregator, false)
        .unwrap();
    tape.value(out).clone()
}

#[test]
fn sage_single_neighbor_aggregates_that_neighbor() {
    let out = sage_aggregate(
        Aggregator::Max,
        2,
        &[(0, 1)],
        array![[9.0, 9.0], [1.0, 3.0]],
    );
    assert_eq!(out.row(0), array![1.0, 3.0].view());
}

#[test]
fn sage_aggregators_follow_their_definitions() {
    let h = array![[0.0, 0.0], [1.0, 3.0], [2.0, 1.0]];
    let min = sage_aggregate(Aggregator::Min, 3, &[(0, 1), (0, 2)], h.clone());
    assert_eq!(min.row(0), array![1.0, 1.0].view());
    let max = sage_aggregate(Aggregator::Max, 3, &[(0, 1), (0, 2)], h.clone());
    assert_eq!(max.row(0), array![2.0, 3.0].view());
    let mean = sage_aggregate(Aggregator::Mean, 3, &[(0, 1), (0, 2)], h);
    assert_eq!(mean.row(0), array![1.5, 2.0].view());
}

#[test]
fn sage_degree_zero_aggregates_zeros() {
    let out = sage_aggregate(Aggregator::Max, 2, &[], array![[5.0, -2.0], [1.0, 1.0]]);
    assert_eq!(out.row(0), array![0.0, 0.0].view());
}

#[test]
fn sampled_neighbor_lists_respect_the_budget() {
    let s = undirected_structure(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
    let mut rng = crate::rng::stream_tagged(3, "sage-test", &[1]);
    let sampled = sample_neighbors(&s, 3, &mut rng);
    let range = sampled.segments.range(0);
    let picked: Vec<u32> = sampled.sources[range].to_vec();
    assert_eq!(picked.len(), 3);
    let mut dedup = picked.clone();
    dedup.sort_unstable();
    dedup.dedup();
    assert_eq!(dedup.len(), 3, "sampling must be without replacement");
}

// ---------------------------------------------------------------------------
// GATv2
// ---------------------------------------------------------------------------

fn gat_layer(in_dim: usize, out_dim: usize, seed: u64) -> GatLayer {
    let mut rng = crate::rng::stream_tagged(seed, "gat-test", &[]);
    GatLayer {
        heads: vec![GatHead {
            w_dst: rand_matrix(&mut rng, in_dim, out_dim),
            w_src: rand_matrix(&mut rng, in_dim, out_dim),
            att: rand_matrix(&mut rng, out_dim, 1),
        }],
        slope: 0.2,
    }
}

#[test]
fn gat_self_only_candidate_passes_message_through() {
    let s = undirected_structure(1, &[]);
    let layer = gat_layer(2, 3, 1);
    let h = array![[1.5, -0.5]];
    let mut tape = Tape::new();
    let ht = tape.leaf(h.clone());
    let (out, _) = layer
        .forward_on(&mut tape, ht, &s.with_self, true, false)
        .unwrap();
    let expected = h.dot(&layer.heads[0].w_src);
    let got = tape.value(out);
    for (a, b) in got.iter().zip(expected.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
    let alpha = layer.attention_coefficients(&h, &s.with_self, 0).unwrap();
    assert_eq!(alpha, vec![1.0]);
}

#[test]
fn gat_equal_scores_split_attention_evenly() {
    // Identical feature rows make every candidate score equal.
    let s = undirected_structure(2, &[(0, 1)]);
    let layer = gat_layer(2, 3, 2);
    let h = array![[0.7, -0.4], [0.7, -0.4]];
    let alpha = layer.attention_coefficients(&h, &s.with_self, 0).unwrap();
    for a in alpha {
        assert!((a - 0.5).abs() < 1e-12);
    }
}

#[test]
fn gat_attention_rows_sum_to_one() {
    let s = undirected_structure(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)]);
    let layer = gat_layer(3, 4, 3);
    let mut rng = crate::rng::stream_tagged(4, "gat-test", &[1]);
    let h = rand_matrix(&mut rng, 5, 3);
    let alpha = layer.attention_coefficients(&h, &s.with_self, 0).unwrap();
    let segs = &s.with_self.segments;
    for v in 0..5 {
        let sum: f64 = segs.range(v).map(|r| alpha[r]).sum();
        assert!((sum - 1.0).abs() < 1e-9, "node {} attention sum {}", v, sum);
    }
}

// ---------------------------------------------------------------------------
// GIN
// ---------------------------------------------------------------------------

fn identity_gin(dim: usize) -> GinLayer {
    GinLayer {
        eps: Array2::zeros((1, 1)),
        w1: identity(dim),
        b1: Array2::zeros((1, dim)),
        w2: identity(dim),
        b2: Array2::zeros((1, dim)),
    }
}

#[test]
fn gin_without_neighbors_is_the_mlp_of_self() {
    let s = undirected_structure(1, &[]);
    let layer = identity_gin(2);
    let mut tape = Tape::new();
    let h = tape.leaf(array![[2.0, 5.0]]);
    let (out, _) = layer.forward_on(&mut tape, h, &s.neighbors).unwrap();
    assert_eq!(tape.value(out), &array![[2.0, 5.0]]);
}

#[test]
fn gin_sums_self_and_neighbors_before_the_mlp() {
    let s = undirected_structure(3, &[(0, 1), (0, 2)]);
    let layer = identity_gin(2);
    let mut tape = Tape::new();
    let h = tape.leaf(array![[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
    let (out, _) = layer.forward_on(&mut tape, h, &s.neighbors).unwrap();
    assert_eq!(tape.value(out).row(0), array![2.0, 2.0].view());
}

#[test]
fn gin_outputs_identical_multisets_on_isomorphic_graphs() {
    // The same 5-node path under a relabeling, constant features.
    let layer = identity_gin(2);
    let h = Array2::from_elem((5, 2), 1.0);
    let run = |edges: &[(u32, u32)]| -> Vec<Vec<u64>> {
        let s = undirected_structure(5, edges);
        let mut tape = Tape::new();
        let ht = tape.leaf(h.clone());
        let (out, _) = layer.forward_on(&mut tape, ht, &s.neighbors).unwrap();
        let mut rows: Vec<Vec<u64>> = tape
            .value(out)
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort();
        rows
    };
    let a = run(&[(0, 1), (1, 2), (2, 3), (3, 4)]);
    let b = run(&[(3, 0), (0, 4), (4, 1), (1, 2)]);
    assert_eq!(a, b);
}

// ---------------------------------------------------------------------------
// Equivariance and gradients
// ---------------------------------------------------------------------------

/// Relabels a degree-limited fixture and checks bitwise-equal permuted
/// outputs. Segments of at most two addends keep floating-point sums
/// order-independent, so equality is exact here.
#[test]
fn every_architecture_is_permutation_equivariant() {
    let edges: Vec<(u32, u32)> = vec![(0, 1), (2, 3)];
    let perm: Vec<u32> = vec![3, 0, 4, 1, 2];
    let permuted_edges: Vec<(u32, u32)> = edges
        .iter()
        .map(|&(a, b)| (perm[a as usize], perm[b as usize]))
        .collect();

    let mut rng = crate::rng::stream_tagged(9, "equivariance", &[]);
    let features = rand_matrix(&mut rng, 5, 3);
    let mut permuted_features = Array2::zeros((5, 3));
    for v in 0..5 {
        permuted_features
            .row_mut(perm[v] as usize)
            .assign(&features.row(v));
    }

    for kind in [GnnKind::Gcn, GnnKind::GraphSage, GnnKind::Gat, GnnKind::Gin] {
        let cfg = GnnConfig {
            kind,
            latent_dim: 4,
            hidden_dim: 6,
            layers: 2,
            heads: 2,
            sample_size: 2,
            seed: 11,
            ..GnnConfig::default()
        };
        let model = GnnModel::new(&cfg, 3, cfg.seed);
        let s = undirected_structure(5, &edges);
        let sp = undirected_structure(5, &permuted_edges);
        let base = model.logits(&features, &s).unwrap();
        let permuted = model.logits(&permuted_features, &sp).unwrap();
        for v in 0..5 {
            for c in 0..2 {
                assert_eq!(
                    base[(v, c)].to_bits(),
                    permuted[(perm[v] as usize, c)].to_bits(),
                    "{:?} node {} logit {}",
                    kind,
                    v,
                    c
                );
            }
        }
    }
}

#[test]
fn layer_gradients_match_finite_differences() {
    let s = undirected_structure(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
    let mut rng = crate::rng::stream_tagged(21, "gnn-fd", &[]);
    let h = rand_matrix(&mut rng, 4, 3);

    // GCN: leaves are [h, w].
    let norm = Rc::clone(&s.gcn_norm);
    check_gradients(
        move |t, l| {
            let xw = t.matmul(l[0], l[1]);
            let prop = t.spmm(Rc::clone(&norm), xw);
            let act = t.relu(prop);
            t.sum_all(act)
        },
        &[h.clone(), rand_matrix(&mut rng, 3, 2)],
        FD_EPS,
        FD_TOL,
    );

    // SAGE with each aggregator: leaves are [h, w].
    let mut sage_rng = crate::rng::stream_tagged(22, "gnn-fd", &[1]);
    let sampled = sample_neighbors(&s, 2, &mut sage_rng);
    for aggregator in [Aggregator::Min, Aggregator::Mean, Aggregator::Max] {
        let sampled = sampled.clone();
        check_gradients(
            move |t, l| {
                let gathered = t.gather(l[0], Rc::clone(&sampled.sources));
                let agg = match aggregator {
                    Aggregator::Min => t.segment_min(gathered, Rc::clone(&sampled.segments)),
                    Aggregator::Mean => t.segment_mean(gathered, Rc::clone(&sampled.segments)),
                    Aggregator::Max => t.segment_max(gathered, Rc::clone(&sampled.segments)),
                };
                let cat = t.concat(l[0], agg);
                let out = t.matmul(cat, l[1]);
                let act = t.relu(out);
                t.sum_all(act)
            },
            &[h.clone(), rand_matrix(&mut rng, 6, 2)],
            FD_EPS,
            FD_TOL,
        );
    }

    // GATv2 head: leaves are [h, w_dst, w_src, att].
    let with_self = s.with_self.clone();
    check_gradients(
        move |t, l| {
            let hd = t.matmul(l[0], l[1]);
            let hs = t.matmul(l[0], l[2]);
            let es = t.gather(hs, Rc::clone(&with_self.sources));
            let ed = t.gather(hd, Rc::clone(&with_self.destinations));
            let pre = t.add(ed, es);
            let pre = t.leaky_relu(pre, 0.2);
            let scores = t.matmul(pre, l[3]);
            let alpha = t.segment_softmax(scores, Rc::clone(&with_self.segments));
            let weighted = t.mul_col(es, alpha);
            let out = t.segment_sum(weighted, Rc::clone(&with_self.segments));
            let act = t.relu(out);
            t.sum_all(act)
        },
        &[
            h.clone(),
            rand_matrix(&mut rng, 3, 2),
            rand_matrix(&mut rng, 3, 2),
            rand_matrix(&mut rng, 2, 1),
        ],
        FD_EPS,
        FD_TOL,
    );

    // GIN: leaves are [h, eps, w1, b1, w2, b2].
    let neighbors = s.neighbors.clone();
    check_gradients(
        move |t, l| {
            let gathered = t.gather(l[0], Rc::clone(&neighbors.sources));
            let nbr = t.segment_sum(gathered, Rc::clone(&neighbors.segments));
            let ope = t.add_const(l[1], 1.0);
            let scaled = t.scale_scalar(l[0], ope);
            let pre = t.add(scaled, nbr);
            let z = t.matmul(pre, l[2]);
            let z = t.add_bias(z, l[3]);
            let z = t.relu(z);
            let z = t.matmul(z, l[4]);
            let out = t.add_bias(z, l[5]);
            t.sum_all(out)
        },
        &[
            h,
            rand_matrix(&mut rng, 1, 1),
            rand_matrix(&mut rng, 3, 3),
            rand_matrix(&mut rng, 1, 3),
            rand_matrix(&mut rng, 3, 3),
            rand_matrix(&mut rng, 1, 3),
        ],
        FD_EPS,
        FD_TOL,
    );
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

fn training_fixture() -> (Array2<f64>, Vec<Label>, MessageStructure) {
    // Two loose clusters of five nodes with class-correlated features.
    let edges = vec![
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 4),
        (0, 2),
        (5, 6),
        (6, 7),
        (7, 8),
        (8, 9),
        (5, 7),
    ];
    let mut rng = crate::rng::stream_tagged(31, "gnn-train", &[]);
    let mut features = Array2::zeros((10, 4));
    let mut labels = Vec::new();
    for v in 0..10 {
        let illicit = v < 5;
        for c in 0..4 {
            features[(v, c)] = if illicit { 0.8 } else { -0.8 } + rng.random_range(-0.2..0.2);
        }
        labels.push(if illicit {
            Label::Illicit
        } else {
            Label::Licit
        });
    }
    (features, labels, undirected_structure(10, &edges))
}

#[test]
fn training_loss_halves_on_a_small_fixture() {
    let (features, labels, structure) = training_fixture();
    let train_idx: Vec<u32> = (0..10).collect();
    for kind in [GnnKind::Gcn, GnnKind::GraphSage, GnnKind::Gat, GnnKind::Gin] {
        let cfg = GnnConfig {
            kind,
            latent_dim: 6,
            hidden_dim: 8,
            layers: 2,
            epochs: 200,
            learning_rate: 0.02,
            sample_size: 2,
            heads: 2,
            seed: 3,
            ..GnnConfig::default()
        };
        let (_, log) = train_gnn(&features, &labels, &train_idx, &[], &structure, &cfg).unwrap();
        let first = log.first().unwrap().train_loss;
        let last = log.last().unwrap().train_loss;
        assert!(
            last <= 0.5 * first,
            "{:?}: first {} last {}",
            kind,
            first,
            last
        );
    }
}

#[test]
fn unknown_label_tokens_never_reach_the_gnn_loss() {
    let (features, mut labels, structure) = training_fixture();
    labels[4] = Label::Unknown;
    let train_idx: Vec<u32> = (0..10u32).filter(|&v| v != 4).collect();
    let cfg = GnnConfig {
        kind: GnnKind::Gcn,
        latent_dim: 4,
        hidden_dim: 4,
        layers: 1,
        epochs: 6,
        learning_rate: 0.05,
        seed: 8,
        ..GnnConfig::default()
    };
    let (_, log_a) = train_gnn(&features, &labels, &train_idx, &[], &structure, &cfg).unwrap();
    labels[4] = Label::Illicit;
    let (_, log_b) = train_gnn(&features, &labels, &train_idx, &[], &structure, &cfg).unwrap();
    for (a, b) in log_a.iter().zip(&log_b) {
        assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
    }
}

#[test]
fn gnn_training_is_bit_deterministic() {
    let (features, labels, structure) = training_fixture();
    let train_idx: Vec<u32> = (0..10).collect();
    let cfg = GnnConfig {
        kind: GnnKind::GraphSage,
        latent_dim: 4,
        hidden_dim: 4,
        layers: 2,
        epochs: 10,
        dropout: 0.3,
        learning_rate: 0.05,
        sample_size: 2,
        seed: 12,
        ..GnnConfig::default()
    };
    let (m1, log1) = train_gnn(&features, &labels, &train_idx, &[], &structure, &cfg).unwrap();
    let (m2, log2) = train_gnn(&features, &labels, &train_idx, &[], &structure, &cfg).unwrap();
    for (a, b) in log1.iter().zip(&log2) {
        assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
    }
    let s1 = m1.scores(&features, &structure).unwrap();
    let s2 = m2.scores(&features, &structure).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn tuned_table_shapes_line_up() {
    // The tuned GCN stack: 94 -> 217 -> 217 -> 87 -> 2.
    let cfg = GnnConfig {
        kind: GnnKind::Gcn,
        latent_dim: 87,
        hidden_dim: 217,
        layers: 3,
        ..GnnConfig::default()
    };
    let model = GnnModel::new(&cfg, 94, 0);
    let dims: Vec<(usize, usize)> = model
        .layers
        .iter()
        .map(|l| match l {
            Layer::Gcn(g) => g.weight.dim(),
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(dims, vec![(94, 217), (217, 217), (217, 87)]);
    assert_eq!(model.out_weight.dim(), (87, 2));

    // GraphSAGE single layer: [self || agg] of 94 -> 77.
    let cfg = GnnConfig {
        kind: GnnKind::GraphSage,
        latent_dim: 77,
        hidden_dim: 192,
        layers: 1,
        ..GnnConfig::default()
    };
    let model = GnnModel::new(&cfg, 94, 0);
    match &model.layers[0] {
        Layer::Sage(l) => assert_eq!(l.weight.dim(), (188, 77)),
        _ => unreachable!(),
    }
}
