//! Metric protocol: AUC-ROC, AUC-PR, top-k% threshold metrics and variance
//! estimation via bootstrap resampling (tabular decoders) or test-mask
//! halving (GNNs).

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Label;
use crate::rng;

/// Labelled test nodes with their illicit-class scores. Unknown labels are
/// excluded at construction.
#[derive(Debug, Clone)]
pub struct ScoredNodes {
    scores: Vec<f64>,
    illicit: Vec<bool>,
}

impl ScoredNodes {
    pub fn new(scores: Vec<f64>, illicit: Vec<bool>) -> Result<Self> {
        if scores.len() != illicit.len() {
            return Err(Error::Shape {
                context: "ScoredNodes::new",
                expected: format!("{} labels", scores.len()),
                actual: format!("{}", illicit.len()),
            });
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("non-finite score".into()));
        }
        Ok(ScoredNodes { scores, illicit })
    }

    /// Collects the nodes listed in `indices`, skipping Unknown labels.
    pub fn from_labels(all_scores: &[f64], labels: &[Label], indices: &[u32]) -> Result<Self> {
        let mut scores = Vec::with_capacity(indices.len());
        let mut illicit = Vec::with_capacity(indices.len());
        for &i in indices {
            match labels[i as usize] {
                Label::Unknown => continue,
                l => {
                    scores.push(all_scores[i as usize]);
                    illicit.push(l == Label::Illicit);
                }
            }
        }
        ScoredNodes::new(scores, illicit)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn num_illicit(&self) -> usize {
        self.illicit.iter().filter(|&&p| p).count()
    }

    fn subset(&self, indices: &[usize]) -> ScoredNodes {
        ScoredNodes {
            scores: indices.iter().map(|&i| self.scores[i]).collect(),
            illicit: indices.iter().map(|&i| self.illicit[i]).collect(),
        }
    }

    fn has_both_classes(&self) -> bool {
        let pos = self.num_illicit();
        pos > 0 && pos < self.len()
    }
}

/// Probability that a random illicit node outranks a random licit one; ties
/// count one half (Mann-Whitney formulation via midranks).
pub fn auc_roc(scored: &ScoredNodes) -> Result<f64> {
    let n = scored.len();
    let pos = scored.num_illicit();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scored.scores[a].total_cmp(&scored.scores[b]));

    // Midranks stay exact in f64: integers and halves well below 2^53.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scored.scores[order[j + 1]] == scored.scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if scored.illicit[idx] {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }

    let p = pos as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * (n - pos) as f64))
}

/// Area under the precision-recall step curve, computed by a descending-score
/// sweep; the segment from recall 0 takes the first attained precision.
pub fn auc_pr(scored: &ScoredNodes) -> Result<f64> {
    let total_pos = scored.num_illicit();
    if total_pos == 0 {
        return Err(Error::NoPositives);
    }
    let n = scored.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scored.scores[b].total_cmp(&scored.scores[a]));

    let mut area = 0.0;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_recall = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scored.scores[order[j + 1]] == scored.scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if scored.illicit[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let recall = tp as f64 / total_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    Ok(area)
}

/// ROC curve points as (false positive rate, true positive rate), sweeping
/// thresholds from high to low over tie groups.
pub fn roc_curve(scored: &ScoredNodes) -> Vec<(f64, f64)> {
    let n = scored.len();
    let pos = scored.num_illicit();
    let neg = n - pos;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scored.scores[b].total_cmp(&scored.scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scored.scores[order[j + 1]] == scored.scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if scored.illicit[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((
            if neg == 0 {
                0.0
            } else {
                fp as f64 / neg as f64
            },
            if pos == 0 {
                0.0
            } else {
                tp as f64 / pos as f64
            },
        ));
        i = j + 1;
    }
    points
}

/// Precision-recall curve points as (recall, precision).
pub fn pr_curve(scored: &ScoredNodes) -> Vec<(f64, f64)> {
    let n = scored.len();
    let total_pos = scored.num_illicit();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scored.scores[b].total_cmp(&scored.scores[a]));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scored.scores[order[j + 1]] == scored.scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if scored.illicit[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        if total_pos > 0 {
            points.push((tp as f64 / total_pos as f64, tp as f64 / (tp + fp) as f64));
        }
        i = j + 1;
    }
    points
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopkMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub flagged: usize,
}

/// Flags the `ceil(k% * n)` highest scores as illicit and scores the decision
/// against the labels. Tie-break: higher score first, then lower node index.
pub fn topk_metrics(scored: &ScoredNodes, k_percent: f64) -> Result<TopkMetrics> {
    let n = scored.len();
    if !(0.0..=100.0).contains(&k_percent) || k_percent <= 0.0 {
        return Err(Error::Config(format!(
            "k_percent {} outside (0, 100]",
            k_percent
        )));
    }
    let flagged = ((k_percent / 100.0) * n as f64).ceil() as usize;
    if flagged == 0 {
        return Err(Error::EmptyTopK { k_percent, n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scored.scores[b]
            .total_cmp(&scored.scores[a])
            .then(a.cmp(&b))
    });

    let total_pos = scored.num_illicit();
    let tp = order[..flagged]
        .iter()
        .filter(|&&i| scored.illicit[i])
        .count();
    let precision = tp as f64 / flagged as f64;
    let recall = if total_pos == 0 {
        0.0
    } else {
        tp as f64 / total_pos as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    if total_pos > 0 {
        debug_assert!(
            (recall - precision * flagged as f64 / total_pos as f64).abs() < 1e-12,
            "recall must equal precision * flagged / positives"
        );
    }
    Ok(TopkMetrics {
        precision,
        recall,
        f1,
        flagged,
    })
}

/// Mean and standard deviation of one metric over resamples. The deviation is
/// the population form, so a single resample reports zero spread.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

/// Per-method metric set over resamples.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub rows: Vec<MetricSummary>,
    pub repetitions: usize,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn get(&self, metric: &str) -> Option<&MetricSummary> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    /// `method,metric,mean,std` rows.
    pub fn to_csv(&self, method: &str) -> String {
        let mut out = String::from("method,metric,mean,std\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6}\n",
                method, row.metric, row.mean, row.std
            ));
        }
        out
    }
}

/// Formats a threshold percentage for metric names: `1%`, `0.1%`, `9.7631%`.
pub fn threshold_name(k_percent: f64) -> String {
    if (k_percent - k_percent.round()).abs() < 1e-12 {
        format!("{}%", k_percent.round() as i64)
    } else {
        let s = format!("{:.4}", k_percent);
        format!("{}%", s.trim_end_matches('0').trim_end_matches('.'))
    }
}

fn metric_set(scored: &ScoredNodes, thresholds: &[f64]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::with_capacity(2 + thresholds.len() * 3);
    out.push(("auc_roc".to_string(), auc_roc(scored)?));
    out.push(("auc_pr".to_string(), auc_pr(scored)?));
    for &k in thresholds {
        let m = topk_metrics(scored, k)?;
        let name = threshold_name(k);
        out.push((format!("precision@{}", name), m.precision));
        out.push((format!("recall@{}", name), m.recall));
        out.push((format!("f1@{}", name), m.f1));
    }
    Ok(out)
}

fn summarize(
    samples: Vec<Vec<(String, f64)>>,
    repetitions: usize,
    notes: Vec<String>,
) -> EvalReport {
    let names: Vec<String> = samples[0].iter().map(|(n, _)| n.clone()).collect();
    let rows = names
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let values: Vec<f64> = samples.iter().map(|s| s[col].1).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
            MetricSummary {
                metric: name.clone(),
                mean,
                std: var.sqrt(),
            }
        })
        .collect();
    EvalReport {
        rows,
        repetitions,
        notes,
    }
}

const MAX_REDRAWS: usize = 10_000;

/// Bootstrap protocol: each repetition scores a same-size resample drawn with
/// replacement; resamples that drop a class are redrawn and counted in the
/// report notes.
pub fn bootstrap_report(
    scored: &ScoredNodes,
    thresholds: &[f64],
    repetitions: usize,
    seed: u64,
) -> Result<EvalReport> {
    if repetitions < 2 {
        return Err(Error::Config(
            "bootstrap needs at least 2 repetitions".into(),
        ));
    }
    if !scored.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let n = scored.len();
    let mut samples = Vec::with_capacity(repetitions);
    let mut redraws = 0usize;
    for rep in 0..repetitions {
        let mut rng = rng::stream_tagged(seed, "bootstrap", &[rep as u64]);
        let resample = loop {
            let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let candidate = scored.subset(&indices);
            if candidate.has_both_classes() {
                break candidate;
            }
            redraws += 1;
            if redraws > MAX_REDRAWS {
                return Err(Error::Config("bootstrap redraw limit exceeded".into()));
            }
        };
        samples.push(metric_set(&resample, thresholds)?);
    }
    let mut notes = Vec::new();
    if redraws > 0 {
        notes.push(format!("redrew {} single-class resamples", redraws));
    }
    Ok(summarize(samples, repetitions, notes))
}

/// Test-mask halving protocol: each repetition scores a uniformly random half
/// of the labelled test nodes.
pub fn mask_halving_report(
    scored: &ScoredNodes,
    thresholds: &[f64],
    repetitions: usize,
    seed: u64,
) -> Result<EvalReport> {
    if scored.len() < 4 {
        return Err(Error::Config(
            "mask halving needs at least 4 labelled test nodes".into(),
        ));
    }
    if repetitions == 0 {
        return Err(Error::Config(
            "mask halving needs at least 1 repetition".into(),
        ));
    }
    if !scored.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let n = scored.len();
    let half = n / 2;
    let mut samples = Vec::with_capacity(repetitions);
    let mut redraws = 0usize;
    for rep in 0..repetitions {
        let mut rng = rng::stream_tagged(seed, "mask-halving", &[rep as u64]);
        let resample = loop {
            let indices: Vec<usize> = rand::seq::index::sample(&mut rng, n, half).into_vec();
            let candidate = scored.subset(&indices);
            if candidate.has_both_classes() {
                break candidate;
            }
            redraws += 1;
            if redraws > MAX_REDRAWS {
                return Err(Error::Config("mask halving redraw limit exceeded".into()));
            }
        };
        samples.push(metric_set(&resample, thresholds)?);
    }
    let mut notes = Vec::new();
    if repetitions == 1 {
        notes.push("single repetition: reported deviation is zero by definition".into());
    }
    if redraws > 0 {
        notes.push(format!("redrew {} single-class resamples", redraws));
    }
    Ok(summarize(samples, repetitions, notes))
}

#[cfg(test)]
mod tests;
