//! The benchmarked methods and their per-method hyperparameter spaces,
//! tuned defaults and trial budgets.

use crate::error::{Error, Result};
use crate::tune::{HyperSpace, ParamKind, ParamValue, TrialConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Decoder on the 166 intrinsic features only.
    Intrinsic,
    /// Intrinsic features plus the 8 engineered egonet/centrality columns.
    Manual,
    DeepWalk,
    /// DeepWalk embedding only, no intrinsic features.
    DeepWalkNi,
    Node2vec,
    Node2vecNi,
    Gcn,
    GraphSage,
    Gat,
    Gin,
}

pub const ALL_METHODS: [Method; 10] = [
    Method::Intrinsic,
    Method::Manual,
    Method::DeepWalk,
    Method::DeepWalkNi,
    Method::Node2vec,
    Method::Node2vecNi,
    Method::Gcn,
    Method::GraphSage,
    Method::Gat,
    Method::Gin,
];

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Intrinsic => "intrinsic",
            Method::Manual => "manual",
            Method::DeepWalk => "deepwalk",
            Method::DeepWalkNi => "deepwalk-ni",
            Method::Node2vec => "node2vec",
            Method::Node2vecNi => "node2vec-ni",
            Method::Gcn => "gcn",
            Method::GraphSage => "graphsage",
            Method::Gat => "gat",
            Method::Gin => "gin",
        }
    }

    pub fn is_gnn(&self) -> bool {
        matches!(
            self,
            Method::Gcn | Method::GraphSage | Method::Gat | Method::Gin
        )
    }

    pub fn is_embedding(&self) -> bool {
        matches!(
            self,
            Method::DeepWalk | Method::DeepWalkNi | Method::Node2vec | Method::Node2vecNi
        )
    }

    /// "-NI" variants exclude intrinsic features from the decoder input.
    pub fn uses_intrinsic(&self) -> bool {
        !matches!(self, Method::DeepWalkNi | Method::Node2vecNi)
    }

    /// Trial budget: 50 for the tabular methods and walk embeddings, 100 for
    /// the GNNs.
    pub fn trial_budget(&self) -> usize {
        if self.is_gnn() {
            100
        } else {
            50
        }
    }

    /// Tuning search space. Keys are normalized snake-case hyperparameter
    /// names shared with the run-config file format.
    pub fn search_space(&self) -> HyperSpace {
        let mut params: Vec<(&str, ParamKind)> = Vec::new();
        let int = |lo: i64, hi: i64| ParamKind::Int { lo, hi };
        let real = |lo: f64, hi: f64| ParamKind::Real { lo, hi };

        if *self == Method::Manual {
            params.push(("alpha", real(0.1, 0.9)));
        }
        if self.is_embedding() {
            params.push(("walks_per_node", int(1, 3)));
            params.push(("walk_length", int(3, 10)));
            params.push(("context_window_size", int(2, 10)));
            params.push(("latent_dim", int(2, 64)));
            if matches!(self, Method::Node2vec | Method::Node2vecNi) {
                params.push(("p", real(0.5, 2.0)));
                params.push(("q", real(0.5, 2.0)));
            }
            params.push(("negative_samples", int(1, 5)));
            params.push(("epochs", int(5, 500)));
        }
        if self.is_gnn() {
            params.push(("latent_dim", int(32, 128)));
            if matches!(self, Method::Gcn | Method::GraphSage) {
                params.push(("gnn_hidden_dim", int(64, 256)));
            }
            params.push(("gnn_layers", int(1, 3)));
            if *self == Method::GraphSage {
                params.push(("neighbourhood_samples", int(2, 5)));
                params.push((
                    "aggregator",
                    ParamKind::Cat(vec!["min".into(), "mean".into(), "max".into()]),
                ));
            }
            if *self == Method::Gat {
                params.push(("heads", int(1, 5)));
            }
            params.push(("dropout_rate", real(0.0, 0.5)));
            params.push(("epochs", int(5, 500)));
        }
        params.push(("learning_rate", real(0.01, 0.1)));
        if !self.is_gnn() {
            if matches!(self, Method::Intrinsic | Method::Manual) {
                params.push(("decoder_layers", int(1, 3)));
                params.push(("decoder_hidden_dim", int(5, 20)));
            }
            let decoder_epoch_hi = if *self == Method::Intrinsic { 500 } else { 100 };
            params.push(("decoder_epochs", int(5, decoder_epoch_hi)));
        }

        HyperSpace {
            params: params
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    /// Shipped tuned defaults for each method.
    pub fn tuned_defaults(&self) -> TrialConfig {
        let mut c = TrialConfig::new();
        let mut int = |k: &str, v: i64| c.set(k, ParamValue::Int(v));
        match self {
            Method::Intrinsic => {
                int("decoder_layers", 1);
                int("decoder_hidden_dim", 5);
                int("decoder_epochs", 497);
                c.set("learning_rate", ParamValue::Real(0.0163));
            }
            Method::Manual => {
                int("decoder_layers", 1);
                int("decoder_hidden_dim", 6);
                int("decoder_epochs", 64);
                c.set("alpha", ParamValue::Real(0.593));
                c.set("learning_rate", ParamValue::Real(0.0166));
            }
            Method::DeepWalk | Method::DeepWalkNi => {
                int("walks_per_node", 2);
                int("walk_length", 3);
                int("context_window_size", 2);
                int("latent_dim", 5);
                int("negative_samples", 1);
                int("epochs", 176);
                int("decoder_layers", 2);
                int("decoder_hidden_dim", 10);
                int("decoder_epochs", 80);
                c.set("learning_rate", ParamValue::Real(0.0554));
            }
            Method::Node2vec | Method::Node2vecNi => {
                int("walks_per_node", 1);
                int("walk_length", 9);
                int("context_window_size", 5);
                int("latent_dim", 47);
                int("negative_samples", 1);
                int("epochs", 222);
                int("decoder_layers", 2);
                int("decoder_hidden_dim", 10);
                int("decoder_epochs", 93);
                c.set("p", ParamValue::Real(1.17));
                c.set("q", ParamValue::Real(1.60));
                c.set("learning_rate", ParamValue::Real(0.0159));
            }
            Method::Gcn => {
                int("latent_dim", 87);
                int("gnn_hidden_dim", 217);
                int("gnn_layers", 3);
                int("epochs", 174);
                c.set("dropout_rate", ParamValue::Real(0.057));
                c.set("learning_rate", ParamValue::Real(0.0864));
            }
            Method::GraphSage => {
                int("latent_dim", 77);
                int("gnn_hidden_dim", 192);
                int("gnn_layers", 1);
                int("neighbourhood_samples", 2);
                int("epochs", 494);
                c.set("aggregator", ParamValue::Cat("max".into()));
                c.set("dropout_rate", ParamValue::Real(0.345));
                c.set("learning_rate", ParamValue::Real(0.0690));
            }
            Method::Gat => {
                int("latent_dim", 104);
                int("gnn_layers", 1);
                int("heads", 1);
                int("epochs", 282);
                c.set("dropout_rate", ParamValue::Real(0.471));
                c.set("learning_rate", ParamValue::Real(0.0487));
            }
            Method::Gin => {
                int("latent_dim", 98);
                int("gnn_layers", 1);
                int("epochs", 42);
                c.set("dropout_rate", ParamValue::Real(0.384));
                c.set("learning_rate", ParamValue::Real(0.0452));
            }
        }
        c
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "intrinsic" | "if" => Ok(Method::Intrinsic),
            "manual" | "egonet" => Ok(Method::Manual),
            "deepwalk" => Ok(Method::DeepWalk),
            "deepwalk-ni" => Ok(Method::DeepWalkNi),
            "node2vec" => Ok(Method::Node2vec),
            "node2vec-ni" => Ok(Method::Node2vecNi),
            "gcn" => Ok(Method::Gcn),
            "graphsage" | "sage" => Ok(Method::GraphSage),
            "gat" => Ok(Method::Gat),
            "gin" => Ok(Method::Gin),
            other => Err(Error::Config(format!("unknown method {:?}", other))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}
