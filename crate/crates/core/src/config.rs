//! Flat `key = value` run configuration. Unknown keys are rejected and later
//! assignments override earlier ones, so command-line overrides are simply
//! applied after the file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::ExperimentConfig;
use crate::sampler::TablePolicy;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    /// Directory with `edges.txt` (and optionally `labels.txt`, `nodes.txt`)
    /// or raw Cora files.
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub precision: Precision,
    pub mu_values: Vec<f64>,
    pub table_policies: Vec<TablePolicy>,
    pub bench_dims: Vec<usize>,
    pub reps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: ExperimentConfig::default(),
            dataset: None,
            out: None,
            precision: Precision::F64,
            mu_values: vec![0.001, 0.005, 0.01, 0.05, 0.1],
            table_policies: ["1", "10", "100", "1000", "10000", "never"]
                .iter()
                .map(|s| s.parse().expect("valid policy"))
                .collect(),
            bench_dims: vec![32, 64, 96],
            reps: 100,
        }
    }
}

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "scenario",
    "model",
    "dims",
    "p",
    "q",
    "walks_per_node",
    "walk_length",
    "window",
    "ns",
    "mu",
    "mode",
    "update",
    "negatives",
    "table_policy",
    "exponent",
    "p0_scale",
    "denominator",
    "lr",
    "walks_per_endpoint",
    "eval_every",
    "seed",
    "trials",
    "eval_lr",
    "eval_epochs",
    "eval_l2",
    "standardize",
    "train_fraction",
    "dataset",
    "out",
    "precision",
    "mu_values",
    "table_policies",
    "bench_dims",
    "reps",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

/// Unit enum variants by their serde name.
fn parse_enum<T: DeserializeOwned>(key: &str, value: &str) -> Result<T, ConfigError> {
    serde_json::from_value(serde_json::Value::String(value.to_string())).map_err(|e| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let e = &mut self.experiment;
        match key {
            "scenario" => e.scenario = parse_enum(key, value)?,
            "model" => e.model = parse_enum(key, value)?,
            "dims" => e.dims = parse(key, value)?,
            "p" => e.walk.p = parse(key, value)?,
            "q" => e.walk.q = parse(key, value)?,
            "walks_per_node" => e.walk.walks_per_node = parse(key, value)?,
            "walk_length" => e.walk.walk_length = parse(key, value)?,
            "window" => e.walk.window = parse(key, value)?,
            "ns" => e.ns = parse(key, value)?,
            "mu" => e.mu = parse(key, value)?,
            "mode" => e.mode = parse_enum(key, value)?,
            "update" => e.update = parse_enum(key, value)?,
            "negatives" => e.negatives = parse_enum(key, value)?,
            "table_policy" => e.table_policy = parse(key, value)?,
            "exponent" => e.exponent = parse(key, value)?,
            "p0_scale" => e.p0_scale = parse(key, value)?,
            "denominator" => e.denominator = parse_enum(key, value)?,
            "lr" => e.lr = parse(key, value)?,
            "walks_per_endpoint" => e.walks_per_endpoint = parse(key, value)?,
            "eval_every" => {
                e.eval_every = match value {
                    "none" | "" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "seed" => e.seed = parse(key, value)?,
            "trials" => e.trials = parse(key, value)?,
            "eval_lr" => e.eval.lr = parse(key, value)?,
            "eval_epochs" => e.eval.epochs = parse(key, value)?,
            "eval_l2" => e.eval.l2 = parse(key, value)?,
            "standardize" => e.eval.standardize = parse(key, value)?,
            "train_fraction" => e.eval.train_fraction = parse(key, value)?,
            "dataset" => self.dataset = (!value.is_empty()).then(|| PathBuf::from(value)),
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            "precision" => self.precision = parse_enum(key, value)?,
            "mu_values" => self.mu_values = parse_list(key, value)?,
            "table_policies" => self.table_policies = parse_list(key, value)?,
            "bench_dims" => self.bench_dims = parse_list(key, value)?,
            "reps" => self.reps = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            self.set(k, v.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn value(&self, key: &str) -> Option<String> {
        let e = &self.experiment;
        let path = |p: &Option<PathBuf>| p.as_ref().map_or_else(String::new, |p| p.display().to_string());
        Some(match key {
            "scenario" => enum_name(&e.scenario),
            "model" => enum_name(&e.model),
            "dims" => e.dims.to_string(),
            "p" => e.walk.p.to_string(),
            "q" => e.walk.q.to_string(),
            "walks_per_node" => e.walk.walks_per_node.to_string(),
            "walk_length" => e.walk.walk_length.to_string(),
            "window" => e.walk.window.to_string(),
            "ns" => e.ns.to_string(),
            "mu" => e.mu.to_string(),
            "mode" => enum_name(&e.mode),
            "update" => enum_name(&e.update),
            "negatives" => enum_name(&e.negatives),
            "table_policy" => e.table_policy.to_string(),
            "exponent" => e.exponent.to_string(),
            "p0_scale" => e.p0_scale.to_string(),
            "denominator" => enum_name(&e.denominator),
            "lr" => e.lr.to_string(),
            "walks_per_endpoint" => e.walks_per_endpoint.to_string(),
            "eval_every" => e.eval_every.map_or_else(|| "none".into(), |k| k.to_string()),
            "seed" => e.seed.to_string(),
            "trials" => e.trials.to_string(),
            "eval_lr" => e.eval.lr.to_string(),
            "eval_epochs" => e.eval.epochs.to_string(),
            "eval_l2" => e.eval.l2.to_string(),
            "standardize" => e.eval.standardize.to_string(),
            "train_fraction" => e.eval.train_fraction.to_string(),
            "dataset" => path(&self.dataset),
            "out" => path(&self.out),
            "precision" => enum_name(&self.precision),
            "mu_values" => join(&self.mu_values),
            "table_policies" => join(&self.table_policies),
            "bench_dims" => join(&self.bench_dims),
            "reps" => self.reps.to_string(),
            _ => return None,
        })
    }

    /// The effective configuration in the same format it is read from.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.value(k).expect("known key")))
            .collect()
    }
}
