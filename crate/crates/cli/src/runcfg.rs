//! Run configuration: defaults overlaid by a flat key-value config file,
//! overlaid by command-line flags.

use std::path::{Path, PathBuf};

use amlnet_core::tune::TrialConfig;
use amlnet_core::{Error, Method, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    Percent(f64),
    /// Resolved at evaluation time to the labelled-train illicit prevalence.
    Prevalence,
}

pub fn parse_thresholds(text: &str) -> Result<Vec<ThresholdSpec>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if part.eq_ignore_ascii_case("p") {
            out.push(ThresholdSpec::Prevalence);
        } else {
            let value: f64 = part
                .parse()
                .map_err(|_| Error::Config(format!("bad threshold {:?}", part)))?;
            if !(0.0..=100.0).contains(&value) || value == 0.0 {
                return Err(Error::Config(format!(
                    "threshold {} outside (0, 100]",
                    value
                )));
            }
            out.push(ThresholdSpec::Percent(value));
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty threshold list".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    pub dataset_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// 0 selects the rayon default.
    pub threads: usize,
    pub thresholds: Vec<ThresholdSpec>,
    pub resamples: usize,
    /// Hyperparameters: tuned defaults overlaid with config-file values.
    pub params: TrialConfig,
    pub betweenness_pivots: usize,
    pub per_period_centralities: bool,
    pub directed_mp: bool,
    pub balanced_class_weights: bool,
    pub dump_walks: bool,
}

impl RunConfig {
    pub fn defaults(method: Method, dataset_dir: PathBuf, out_dir: PathBuf) -> Self {
        RunConfig {
            method,
            dataset_dir,
            out_dir,
            seed: 0,
            threads: 0,
            thresholds: vec![
                ThresholdSpec::Percent(0.1),
                ThresholdSpec::Percent(1.0),
                ThresholdSpec::Percent(10.0),
                ThresholdSpec::Prevalence,
            ],
            resamples: 100,
            params: method.tuned_defaults(),
            betweenness_pivots: 2_000,
            per_period_centralities: false,
            directed_mp: false,
            balanced_class_weights: false,
            dump_walks: false,
        }
    }

    /// Overlays a config file. Hyperparameter keys merge into `params`; the
    /// reserved keys below steer the run itself. With `allow_method_switch`
    /// off (benchmark-all pins the method per row) a `method` key is ignored.
    pub fn apply_config_file(&mut self, path: &Path, allow_method_switch: bool) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
        let map = amlnet_core::kvfile::parse(&text)?;
        if allow_method_switch {
            if let Some(name) = map.get("method") {
                self.method = name.parse()?;
                self.params = self.method.tuned_defaults();
            }
        }
        let mut params = TrialConfig::new();
        for (key, value) in map {
            match key.as_str() {
                "method" => {}
                "seed" => {
                    self.seed = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad seed {:?}", value)))?
                }
                "thresholds" => self.thresholds = parse_thresholds(&value)?,
                "resamples" => {
                    self.resamples = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad resamples {:?}", value)))?
                }
                "betweenness_pivots" => {
                    self.betweenness_pivots = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad betweenness_pivots {:?}", value)))?
                }
                "per_period_centralities" => {
                    self.per_period_centralities = parse_bool(&key, &value)?
                }
                "directed_mp" => self.directed_mp = parse_bool(&key, &value)?,
                "balanced_class_weights" => self.balanced_class_weights = parse_bool(&key, &value)?,
                _ => {
                    let parsed = TrialConfig::from_kv(&format!("{} = {}", key, value))?;
                    for (k, v) in parsed.values {
                        params.values.insert(k, v);
                    }
                }
            }
        }
        self.params = self.params.merged_with(&params);
        Ok(())
    }

    /// Resolved settings as key-value text, written into every run directory.
    pub fn to_kv(&self, manifest_sha256: &str, columns_sha256: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("method = {}\n", self.method));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("threads = {}\n", self.threads));
        out.push_str(&format!("resamples = {}\n", self.resamples));
        let ths: Vec<String> = self
            .thresholds
            .iter()
            .map(|t| match t {
                ThresholdSpec::Percent(v) => format!("{}", v),
                ThresholdSpec::Prevalence => "p".to_string(),
            })
            .collect();
        out.push_str(&format!("thresholds = {}\n", ths.join(",")));
        out.push_str(&format!(
            "betweenness_pivots = {}\n",
            self.betweenness_pivots
        ));
        out.push_str(&format!(
            "per_period_centralities = {}\n",
            self.per_period_centralities
        ));
        out.push_str(&format!("directed_mp = {}\n", self.directed_mp));
        out.push_str(&format!(
            "balanced_class_weights = {}\n",
            self.balanced_class_weights
        ));
        out.push_str(&self.params.to_kv());
        out.push_str(&format!("tool_version = {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("manifest_sha256 = {}\n", manifest_sha256));
        if !columns_sha256.is_empty() {
            out.push_str(&format!("columns_sha256 = {}\n", columns_sha256));
        }
        out
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!(
            "bad boolean for {}: {:?}",
            key, other
        ))),
    }
}

/// Process exit codes: 0 success, 1 usage error, 2 data error, 3 training
/// failure.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 1,
        Error::Data { .. }
        | Error::Io { .. }
        | Error::SingleClass
        | Error::NoPositives
        | Error::EmptyTopK { .. } => 2,
        Error::Shape { .. }
        | Error::NonConvergence { .. }
        | Error::NanLoss { .. }
        | Error::NanGradient { .. }
        | Error::EmptyMask
        | Error::AllTrialsFailed(_) => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_parse_with_prevalence_token() {
        let ths = parse_thresholds("0.1,1,10,p").unwrap();
        assert_eq!(ths.len(), 4);
        assert_eq!(ths[0], ThresholdSpec::Percent(0.1));
        assert_eq!(ths[3], ThresholdSpec::Prevalence);
        assert!(parse_thresholds("0").is_err());
        assert!(parse_thresholds("").is_err());
    }

    #[test]
    fn config_file_overlays_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "method = gcn\nseed = 9\nepochs = 12\nlearning_rate = 0.02\nresamples = 7\n",
        )
        .unwrap();
        let mut cfg = RunConfig::defaults(Method::Intrinsic, ".".into(), "out".into());
        cfg.apply_config_file(&path, true).unwrap();
        assert_eq!(cfg.method, Method::Gcn);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.resamples, 7);
        assert_eq!(cfg.params.get_int("epochs").unwrap(), 12);
        // Untouched tuned defaults survive the overlay.
        assert_eq!(cfg.params.get_int("latent_dim").unwrap(), 87);
        assert_eq!(cfg.params.get_real("learning_rate").unwrap(), 0.02);
    }

    #[test]
    fn pinned_method_ignores_method_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "method = gcn\ndecoder_epochs = 3\n").unwrap();
        let mut cfg = RunConfig::defaults(Method::Intrinsic, ".".into(), "out".into());
        cfg.apply_config_file(&path, false).unwrap();
        assert_eq!(cfg.method, Method::Intrinsic);
        assert_eq!(cfg.params.get_int("decoder_epochs").unwrap(), 3);
    }
}
