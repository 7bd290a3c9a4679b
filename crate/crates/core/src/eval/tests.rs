use super::*;
use rand::Rng;

// ---------------------------------------------------------------------------
// Independent oracles. These stay brute force on purpose; the implementations
// above must match them, never the other way around.
// ---------------------------------------------------------------------------

/// Pairwise comparison oracle: wins + half-ties over all (pos, neg) pairs.
fn auc_roc_oracle(scored: &ScoredNodes) -> f64 {
    let (mut wins, mut ties, mut pairs) = (0u64, 0u64, 0u64);
    for i in 0..scored.len() {
        for j in 0..scored.len() {
            let (si, sj) = (score(scored, i), score(scored, j));
            if is_pos(scored, i) && !is_pos(scored, j) {
                pairs += 1;
                if si > sj {
                    wins += 1;
                } else if si == sj {
                    ties += 1;
                }
            }
        }
    }
    (wins as f64 + ties as f64 / 2.0) / pairs as f64
}

/// Threshold-enumeration oracle: recompute the confusion matrix from scratch
/// at every distinct score, then step-integrate precision over recall.
fn auc_pr_oracle(scored: &ScoredNodes) -> f64 {
    let mut thresholds: Vec<f64> = (0..scored.len()).map(|i| score(scored, i)).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let total_pos = (0..scored.len()).filter(|&i| is_pos(scored, i)).count();
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let mut tp = 0usize;
        let mut fp = 0usize;
        for i in 0..scored.len() {
            if score(scored, i) >= t {
                if is_pos(scored, i) {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        let recall = tp as f64 / total_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    area
}

fn score(s: &ScoredNodes, i: usize) -> f64 {
    s.scores[i]
}

fn is_pos(s: &ScoredNodes, i: usize) -> bool {
    s.illicit[i]
}

fn make(scores: &[f64], illicit: &[bool]) -> ScoredNodes {
    ScoredNodes::new(scores.to_vec(), illicit.to_vec()).unwrap()
}

fn random_scored(rng: &mut impl Rng, n: usize, quantize: bool) -> ScoredNodes {
    let scores: Vec<f64> = (0..n)
        .map(|_| {
            let s: f64 = rng.random();
            if quantize {
                (s * 8.0).round() / 8.0
            } else {
                s
            }
        })
        .collect();
    let illicit: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.3).collect();
    // Guarantee both classes.
    let mut illicit = illicit;
    illicit[0] = true;
    illicit[n - 1] = false;
    ScoredNodes::new(scores, illicit).unwrap()
}

// ---------------------------------------------------------------------------
// AUC-ROC
// ---------------------------------------------------------------------------

#[test]
fn auc_roc_perfect_separation_is_one() {
    let s = make(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]);
    assert_eq!(auc_roc(&s).unwrap(), 1.0);
}

#[test]
fn auc_roc_all_ties_is_half() {
    let s = make(&[0.5, 0.5, 0.5, 0.5], &[true, false, true, false]);
    assert_eq!(auc_roc(&s).unwrap(), 0.5);
}

#[test]
fn auc_roc_four_point_fixture() {
    // Enumerating the 4 (pos, neg) pairs gives 3 wins out of 4.
    let s = make(&[0.9, 0.8, 0.4, 0.3], &[true, false, true, false]);
    assert_eq!(auc_roc(&s).unwrap(), 0.75);
}

#[test]
fn auc_roc_rejects_single_class() {
    let s = make(&[0.9, 0.8], &[true, true]);
    assert!(matches!(auc_roc(&s), Err(Error::SingleClass)));
}

#[test]
fn auc_roc_matches_pairwise_oracle_exactly() {
    let mut rng = rng::stream_tagged(11, "eval-test", &[1]);
    for case in 0..60 {
        let n = 2 + (case % 40) * 7;
        let s = random_scored(&mut rng, n.max(4), case % 2 == 0);
        let fast = auc_roc(&s).unwrap();
        let oracle = auc_roc_oracle(&s);
        assert_eq!(fast, oracle, "case {}", case);
    }
}

// ---------------------------------------------------------------------------
// AUC-PR
// ---------------------------------------------------------------------------

#[test]
fn auc_pr_perfect_ranking_is_one() {
    let s = make(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]);
    assert_eq!(auc_pr(&s).unwrap(), 1.0);
}

#[test]
fn auc_pr_four_point_fixture() {
    // Frozen from the threshold-enumeration oracle: 1/2 + 1/3.
    let s = make(&[0.9, 0.8, 0.4, 0.3], &[true, false, true, false]);
    let value = auc_pr(&s).unwrap();
    assert!((value - 5.0 / 6.0).abs() < 1e-15);
    assert!((value - auc_pr_oracle(&s)).abs() < 1e-15);
}

#[test]
fn auc_pr_random_scores_approach_prevalence() {
    let mut rng = rng::stream_tagged(29, "eval-test", &[2]);
    let n = 100_000;
    let prevalence = 0.2;
    let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let illicit: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < prevalence).collect();
    let s = ScoredNodes::new(scores, illicit).unwrap();
    let pi = s.num_illicit() as f64 / n as f64;
    assert!((auc_pr(&s).unwrap() - pi).abs() < 0.02);
}

#[test]
fn auc_pr_matches_enumeration_oracle() {
    let mut rng = rng::stream_tagged(31, "eval-test", &[3]);
    for case in 0..40 {
        let n = 4 + (case % 25) * 11;
        let s = random_scored(&mut rng, n, case % 2 == 1);
        let fast = auc_pr(&s).unwrap();
        let oracle = auc_pr_oracle(&s);
        assert!(
            (fast - oracle).abs() < 1e-12,
            "case {}: {} vs {}",
            case,
            fast,
            oracle
        );
    }
}

#[test]
fn aucs_invariant_under_monotone_transform() {
    let mut rng = rng::stream_tagged(37, "eval-test", &[4]);
    let s = random_scored(&mut rng, 257, true);
    let transformed = ScoredNodes::new(
        s.scores.iter().map(|x| (3.0 * x).exp() + 7.0).collect(),
        s.illicit.clone(),
    )
    .unwrap();
    assert_eq!(auc_roc(&s).unwrap(), auc_roc(&transformed).unwrap());
    assert!((auc_pr(&s).unwrap() - auc_pr(&transformed).unwrap()).abs() < 1e-12);
}

// ---------------------------------------------------------------------------
// Top-k thresholds
// ---------------------------------------------------------------------------

#[test]
fn topk_all_illicit_in_top_k_gives_full_precision() {
    let s = make(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]);
    let m = topk_metrics(&s, 50.0).unwrap();
    assert_eq!(m.flagged, 2);
    assert_eq!(m.precision, 1.0);
    assert_eq!(m.recall, 1.0);
}

#[test]
fn topk_three_point_fixture() {
    // ceil(20% * 3) flags exactly one node, the score-3 illicit one.
    let s = make(&[3.0, 2.0, 1.0], &[true, false, true]);
    let m = topk_metrics(&s, 20.0).unwrap();
    assert_eq!(m.flagged, 1);
    assert_eq!(m.precision, 1.0);
    assert_eq!(m.recall, 0.5);
    assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn topk_tie_break_prefers_lower_index() {
    let s = make(&[1.0, 1.0, 1.0], &[false, true, true]);
    let m = topk_metrics(&s, 34.0).unwrap();
    assert_eq!(m.flagged, 2);
    // Indices 0 and 1 are flagged, only index 1 is illicit.
    assert_eq!(m.precision, 0.5);
}

#[test]
fn topk_rejects_bad_percent() {
    let s = make(&[1.0, 0.0], &[true, false]);
    assert!(topk_metrics(&s, 0.0).is_err());
    assert!(topk_metrics(&s, 101.0).is_err());
}

#[test]
fn threshold_names_render_compactly() {
    assert_eq!(threshold_name(1.0), "1%");
    assert_eq!(threshold_name(0.1), "0.1%");
    assert_eq!(threshold_name(9.76312), "9.7631%");
}

// ---------------------------------------------------------------------------
// Resampling reports
// ---------------------------------------------------------------------------

#[test]
fn bootstrap_two_point_set_has_zero_std() {
    // Every class-preserving resample of {one pos, one neg} is the same
    // multiset, so all metrics are constant and the deviation is zero.
    let s = make(&[0.9, 0.1], &[true, false]);
    let report = bootstrap_report(&s, &[50.0], 20, 3).unwrap();
    for row in &report.rows {
        assert_eq!(row.std, 0.0, "{}", row.metric);
    }
    assert!(!report.notes.is_empty(), "redraws should be logged");
}

#[test]
fn bootstrap_std_shrinks_with_sqrt_of_size() {
    let mut rng = rng::stream_tagged(41, "eval-test", &[5]);
    let base = random_scored(&mut rng, 240, false);
    let doubled = ScoredNodes::new(
        [base.scores.as_slice(), base.scores.as_slice()].concat(),
        [base.illicit.as_slice(), base.illicit.as_slice()].concat(),
    )
    .unwrap();
    let a = bootstrap_report(&base, &[], 400, 7).unwrap();
    let b = bootstrap_report(&doubled, &[], 400, 7).unwrap();
    let ratio = b.get("auc_roc").unwrap().std / a.get("auc_roc").unwrap().std;
    assert!(
        (ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.1,
        "ratio {}",
        ratio
    );
}

#[test]
fn bootstrap_requires_two_reps_and_two_classes() {
    let s = make(&[0.9, 0.1], &[true, false]);
    assert!(bootstrap_report(&s, &[], 1, 0).is_err());
    let single = make(&[0.9, 0.1], &[true, true]);
    assert!(matches!(
        bootstrap_report(&single, &[], 10, 0),
        Err(Error::SingleClass)
    ));
}

#[test]
fn mask_halving_single_rep_is_degenerate_and_warned() {
    let s = make(&[0.9, 0.7, 0.3, 0.1], &[true, true, false, false]);
    let report = mask_halving_report(&s, &[], 1, 5).unwrap();
    for row in &report.rows {
        assert_eq!(row.std, 0.0);
    }
    assert!(report.notes.iter().any(|n| n.contains("single repetition")));
}

#[test]
fn mask_halving_mean_consistent_with_full_metric() {
    let mut rng = rng::stream_tagged(43, "eval-test", &[6]);
    let s = random_scored(&mut rng, 600, false);
    let full = auc_roc(&s).unwrap();
    let report = mask_halving_report(&s, &[], 200, 11).unwrap();
    let summary = report.get("auc_roc").unwrap();
    assert!(
        (summary.mean - full).abs() <= 2.0 * summary.std.max(1e-3),
        "half-mask mean {} vs full {} (std {})",
        summary.mean,
        full,
        summary.std
    );
}

#[test]
fn reports_are_reproducible_for_a_seed() {
    let mut rng = rng::stream_tagged(47, "eval-test", &[7]);
    let s = random_scored(&mut rng, 120, true);
    let a = bootstrap_report(&s, &[1.0, 10.0], 50, 99).unwrap();
    let b = bootstrap_report(&s, &[1.0, 10.0], 50, 99).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.mean, y.mean);
        assert_eq!(x.std, y.std);
    }
}
