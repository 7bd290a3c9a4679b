//! Hyperparameter search over declarative ranges: seeded uniform random
//! search by default, plus a lightweight tree-structured estimator that
//! splits history at the median objective and samples from a density fit to
//! the good half.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    Int { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64 },
    Cat(Vec<String>),
}

/// Named parameters with their ranges, one row per tunable.
#[derive(Debug, Clone, Default)]
pub struct HyperSpace {
    pub params: Vec<(String, ParamKind)>,
}

impl HyperSpace {
    pub fn get(&self, name: &str) -> Option<&ParamKind> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, k)| k)
    }

    /// Every declared parameter must be present and in range.
    pub fn validate(&self, config: &TrialConfig) -> Result<()> {
        for (name, kind) in &self.params {
            let value = config
                .values
                .get(name)
                .ok_or_else(|| Error::Config(format!("missing parameter {}", name)))?;
            let ok = match (kind, value) {
                (ParamKind::Int { lo, hi }, ParamValue::Int(v)) => lo <= v && v <= hi,
                (ParamKind::Real { lo, hi }, ParamValue::Real(v)) => *lo <= *v && *v <= *hi,
                (ParamKind::Cat(options), ParamValue::Cat(v)) => options.contains(v),
                _ => false,
            };
            if !ok {
                return Err(Error::Config(format!(
                    "parameter {} = {:?} outside {:?}",
                    name, value, kind
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Cat(String),
}

/// One sampled configuration: a flat name -> value map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    #[serde(flatten)]
    pub values: BTreeMap<String, ParamValue>,
}

impl TrialConfig {
    pub fn new() -> Self {
        TrialConfig::default()
    }

    pub fn set(&mut self, name: &str, value: ParamValue) {
        self.values.insert(name.to_string(), value);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn get_int(&self, name: &str) -> Result<i64> {
        match self.values.get(name) {
            Some(ParamValue::Int(v)) => Ok(*v),
            Some(ParamValue::Real(v)) if v.fract() == 0.0 => Ok(*v as i64),
            Some(other) => Err(Error::Config(format!(
                "{} is not an integer: {:?}",
                name, other
            ))),
            None => Err(Error::Config(format!("missing parameter {}", name))),
        }
    }

    pub fn get_real(&self, name: &str) -> Result<f64> {
        match self.values.get(name) {
            Some(ParamValue::Real(v)) => Ok(*v),
            Some(ParamValue::Int(v)) => Ok(*v as f64),
            Some(other) => Err(Error::Config(format!(
                "{} is not a number: {:?}",
                name, other
            ))),
            None => Err(Error::Config(format!("missing parameter {}", name))),
        }
    }

    pub fn get_str(&self, name: &str) -> Result<&str> {
        match self.values.get(name) {
            Some(ParamValue::Cat(v)) => Ok(v),
            Some(other) => Err(Error::Config(format!(
                "{} is not categorical: {:?}",
                name, other
            ))),
            None => Err(Error::Config(format!("missing parameter {}", name))),
        }
    }

    /// Overlays `other` on top of this config.
    pub fn merged_with(&self, other: &TrialConfig) -> TrialConfig {
        let mut out = self.clone();
        for (k, v) in &other.values {
            out.values.insert(k.clone(), v.clone());
        }
        out
    }

    /// Flat `key = value` rendering (the run-config file body).
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let rendered = match v {
                ParamValue::Int(i) => i.to_string(),
                ParamValue::Real(r) => format!("{}", r),
                ParamValue::Cat(c) => c.clone(),
            };
            let _ = writeln!(out, "{} = {}", k, rendered);
        }
        out
    }

    /// Parses kv text, typing each value as int, then real, then categorical.
    pub fn from_kv(text: &str) -> Result<TrialConfig> {
        let map = crate::kvfile::parse(text)?;
        let mut config = TrialConfig::new();
        for (k, raw) in map {
            let value = if let Ok(i) = raw.parse::<i64>() {
                ParamValue::Int(i)
            } else if let Ok(r) = raw.parse::<f64>() {
                ParamValue::Real(r)
            } else {
                ParamValue::Cat(raw)
            };
            config.values.insert(k, value);
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Random,
    TpeLite,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "tpe" | "tpe-lite" => Ok(Strategy::TpeLite),
            other => Err(Error::Config(format!(
                "unknown search strategy {:?}",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub params: TrialConfig,
    pub val_auc_pr: Option<f64>,
    pub status: TrialStatus,
    pub seconds: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: TrialConfig,
    pub best_objective: f64,
    pub best_trial_id: usize,
    pub records: Vec<TrialRecord>,
}

/// Samples one in-range configuration. `Random` ignores history; `TpeLite`
/// conditions on it once at least eight finished trials exist.
pub fn sample_trial(
    space: &HyperSpace,
    history: &[TrialRecord],
    strategy: Strategy,
    rng: &mut ChaCha8Rng,
) -> TrialConfig {
    let ok_trials: Vec<&TrialRecord> = history
        .iter()
        .filter(|t| t.status == TrialStatus::Ok && t.val_auc_pr.is_some())
        .collect();
    if strategy == Strategy::Random || ok_trials.len() < 8 {
        return sample_uniform(space, rng);
    }
    sample_tpe(space, &ok_trials, rng)
}

fn sample_uniform(space: &HyperSpace, rng: &mut ChaCha8Rng) -> TrialConfig {
    let mut config = TrialConfig::new();
    for (name, kind) in &space.params {
        let value = match kind {
            ParamKind::Int { lo, hi } => ParamValue::Int(rng.random_range(*lo..=*hi)),
            ParamKind::Real { lo, hi } => ParamValue::Real(rng.random_range(*lo..*hi)),
            ParamKind::Cat(options) => {
                ParamValue::Cat(options[rng.random_range(0..options.len())].clone())
            }
        };
        config.set(name, value);
    }
    config
}

/// Good/bad split at the median objective; candidates are perturbed good
/// configurations scored by the per-dimension density ratio.
fn sample_tpe(space: &HyperSpace, ok_trials: &[&TrialRecord], rng: &mut ChaCha8Rng) -> TrialConfig {
    let mut sorted: Vec<&TrialRecord> = ok_trials.to_vec();
    sorted.sort_by(|a, b| {
        b.val_auc_pr
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.val_auc_pr.unwrap_or(f64::NEG_INFINITY))
    });
    let split = (sorted.len() / 2).max(1);
    let (good, bad) = sorted.split_at(split);

    const CANDIDATES: usize = 16;
    let mut best: Option<(f64, TrialConfig)> = None;
    for _ in 0..CANDIDATES {
        let anchor = good[rng.random_range(0..good.len())];
        let mut candidate = TrialConfig::new();
        let mut score = 0.0;
        for (name, kind) in &space.params {
            let value = perturb(kind, anchor.params.values.get(name), rng);
            score += log_density_ratio(kind, &value, name, good, bad);
            candidate.set(name, value);
        }
        if best.as_ref().map(|(s, _)| score > *s).unwrap_or(true) {
            best = Some((score, candidate));
        }
    }
    best.expect("at least one candidate").1
}

fn perturb(kind: &ParamKind, anchor: Option<&ParamValue>, rng: &mut ChaCha8Rng) -> ParamValue {
    match kind {
        ParamKind::Real { lo, hi } => {
            let center = match anchor {
                Some(ParamValue::Real(v)) => *v,
                Some(ParamValue::Int(v)) => *v as f64,
                _ => (lo + hi) / 2.0,
            };
            let sigma = (hi - lo) / 8.0;
            let noise: f64 = gaussian(rng) * sigma;
            ParamValue::Real((center + noise).clamp(*lo, *hi))
        }
        ParamKind::Int { lo, hi } => {
            let center = match anchor {
                Some(ParamValue::Int(v)) => *v as f64,
                Some(ParamValue::Real(v)) => *v,
                _ => (*lo + *hi) as f64 / 2.0,
            };
            let sigma = ((hi - lo) as f64 / 8.0).max(0.5);
            let noise: f64 = gaussian(rng) * sigma;
            ParamValue::Int(((center + noise).round() as i64).clamp(*lo, *hi))
        }
        ParamKind::Cat(options) => {
            // Keep the anchor's choice three times out of four.
            if let Some(ParamValue::Cat(v)) = anchor {
                if rng.random::<f64>() < 0.75 {
                    return ParamValue::Cat(v.clone());
                }
            }
            ParamValue::Cat(options[rng.random_range(0..options.len())].clone())
        }
    }
}

fn log_density_ratio(
    kind: &ParamKind,
    value: &ParamValue,
    name: &str,
    good: &[&TrialRecord],
    bad: &[&TrialRecord],
) -> f64 {
    let numeric = |v: &ParamValue| match v {
        ParamValue::Int(i) => Some(*i as f64),
        ParamValue::Real(r) => Some(*r),
        ParamValue::Cat(_) => None,
    };
    match kind {
        ParamKind::Cat(options) => {
            let count = |set: &[&TrialRecord], target: &str| {
                set.iter()
                    .filter(|t| matches!(t.params.values.get(name), Some(ParamValue::Cat(c)) if c == target))
                    .count() as f64
            };
            let target = match value {
                ParamValue::Cat(c) => c.as_str(),
                _ => return 0.0,
            };
            let k = options.len() as f64;
            let pg = (count(good, target) + 1.0) / (good.len() as f64 + k);
            let pb = (count(bad, target) + 1.0) / (bad.len() as f64 + k);
            (pg / pb).ln()
        }
        ParamKind::Int { lo, hi } => {
            parzen_ratio(numeric(value), name, good, bad, (*lo as f64, *hi as f64))
        }
        ParamKind::Real { lo, hi } => parzen_ratio(numeric(value), name, good, bad, (*lo, *hi)),
    }
}

fn parzen_ratio(
    value: Option<f64>,
    name: &str,
    good: &[&TrialRecord],
    bad: &[&TrialRecord],
    range: (f64, f64),
) -> f64 {
    let x = match value {
        Some(x) => x,
        None => return 0.0,
    };
    let width = (range.1 - range.0).max(1e-12);
    let density = |set: &[&TrialRecord]| {
        let points: Vec<f64> = set
            .iter()
            .filter_map(|t| match t.params.values.get(name) {
                Some(ParamValue::Real(r)) => Some(*r),
                Some(ParamValue::Int(i)) => Some(*i as f64),
                _ => None,
            })
            .collect();
        if points.is_empty() {
            return 1.0 / width;
        }
        let bandwidth = width / (points.len() as f64).sqrt().max(2.0);
        let mut total = 0.0;
        for p in &points {
            let z = (x - p) / bandwidth;
            total += (-0.5 * z * z).exp();
        }
        // Uniform floor keeps the ratio finite far from every point.
        (total / (points.len() as f64 * bandwidth)).max(1e-3 / width)
    };
    (density(good) / density(bad)).ln()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniform draws per sample keeps the stream aligned.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Runs `budget` trials and returns the configuration with the highest
/// objective (validation AUC-PR). Failed trials are recorded, not fatal;
/// only a fully failed search is an error.
///
/// The objective receives the sampled configuration plus a per-trial seed
/// derived from the search seed, so trials are independent and replayable.
pub fn run_search<F>(
    space: &HyperSpace,
    budget: usize,
    strategy: Strategy,
    seed: u64,
    mut objective: F,
) -> Result<SearchResult>
where
    F: FnMut(&TrialConfig, u64) -> Result<f64>,
{
    assert!(budget >= 1, "budget must be at least 1");
    let mut records: Vec<TrialRecord> = Vec::with_capacity(budget);
    for trial_id in 0..budget {
        let mut sampler_rng = rng::stream_tagged(seed, "trial-sampler", &[trial_id as u64]);
        let params = sample_trial(space, &records, strategy, &mut sampler_rng);
        debug_assert!(space.validate(&params).is_ok());
        let trial_seed = rng::derive(seed, &[rng::label("trial-seed"), trial_id as u64]);
        let start = Instant::now();
        let outcome = objective(&params, trial_seed);
        let seconds = start.elapsed().as_secs_f64();
        let record = match outcome {
            Ok(value) if value.is_finite() => TrialRecord {
                trial_id,
                params,
                val_auc_pr: Some(value),
                status: TrialStatus::Ok,
                seconds,
                seed: trial_seed,
            },
            _ => TrialRecord {
                trial_id,
                params,
                val_auc_pr: None,
                status: TrialStatus::Failed,
                seconds,
                seed: trial_seed,
            },
        };
        records.push(record);
    }

    let best = records
        .iter()
        .filter(|r| r.status == TrialStatus::Ok)
        .max_by(|a, b| {
            a.val_auc_pr
                .unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&b.val_auc_pr.unwrap_or(f64::NEG_INFINITY))
        })
        .ok_or(Error::AllTrialsFailed(budget))?;
    Ok(SearchResult {
        best: best.params.clone(),
        best_objective: best.val_auc_pr.expect("ok trial has objective"),
        best_trial_id: best.trial_id,
        records: records.clone(),
    })
}

/// One JSON object per line: trial id, params, objective, status, seconds.
pub fn trials_to_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn write_trials_jsonl(path: &Path, records: &[TrialRecord]) -> Result<()> {
    std::fs::write(path, trials_to_jsonl(records)).map_err(|e| Error::io(path, e))
}
