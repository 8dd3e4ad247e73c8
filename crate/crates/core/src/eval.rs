//! Node classification on embeddings: one-vs-rest logistic regression and F1 scores.

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Embedding;
use crate::graph::NodeId;
use crate::rng::Rng;
use crate::scalar::sigmoid;

pub type ClassId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("need at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("need at least one trial")]
    NoTrials,
    #[error("non-finite feature values")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub standardize: bool,
    /// Fraction of labeled nodes used for training.
    pub train_fraction: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            lr: 0.1,
            epochs: 200,
            l2: 1e-4,
            standardize: true,
            train_fraction: 0.9,
        }
    }
}

/// Uniform random train/test partition of the labeled nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSplit {
    pub train: Vec<NodeId>,
    pub test: Vec<NodeId>,
}

impl LabeledSplit {
    pub fn new(mut nodes: Vec<NodeId>, train_fraction: f64, rng: &mut Rng) -> Self {
        nodes.shuffle(rng);
        let n_train = ((nodes.len() as f64) * train_fraction).round() as usize;
        let n_train = n_train.min(nodes.len());
        let test = nodes.split_off(n_train);
        LabeledSplit { train: nodes, test }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassScores>,
}

/// Micro and macro F1 over classes `0..num_classes`. Classes absent from both
/// predictions and truth contribute F1 = 0 to the macro mean.
pub fn f1_scores(
    predictions: &[ClassId],
    truth: &[ClassId],
    num_classes: usize,
) -> Result<F1Report, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch(predictions.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let k = num_classes
        .max(predictions.iter().chain(truth).max().map_or(0, |&m| m + 1));
    let mut tp = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut fn_ = vec![0usize; k];
    for (&p, &t) in predictions.iter().zip(truth) {
        if p == t {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let f1 = |tp: usize, fp: usize, fn_: usize| ratio(2 * tp, 2 * tp + fp + fn_);
    let per_class: Vec<ClassScores> = (0..k)
        .map(|c| ClassScores {
            precision: ratio(tp[c], tp[c] + fp[c]),
            recall: ratio(tp[c], tp[c] + fn_[c]),
            f1: f1(tp[c], fp[c], fn_[c]),
            support: tp[c] + fn_[c],
        })
        .collect();
    let (stp, sfp, sfn) = (tp.iter().sum(), fp.iter().sum(), fn_.iter().sum());
    Ok(F1Report {
        micro_f1: f1(stp, sfp, sfn),
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / k as f64,
        per_class,
    })
}

/// K one-vs-rest binary logistic models over (optionally standardized) features.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrClassifier {
    dims: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    mean: Vec<f64>,
    inv_std: Vec<f64>,
}

impl OvrClassifier {
    pub fn num_classes(&self) -> usize {
        self.biases.len()
    }

    fn transform(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (x[i] - self.mean[i]) * self.inv_std[i];
        }
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dims];
        self.transform(x, &mut z);
        (0..self.num_classes())
            .map(|c| {
                let w = &self.weights[c * self.dims..(c + 1) * self.dims];
                w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + self.biases[c]
            })
            .collect()
    }

    /// Arg-max class; ties go to the lowest id.
    pub fn predict(&self, x: &[f64]) -> ClassId {
        let s = self.scores(x);
        let mut best = 0;
        for (c, &v) in s.iter().enumerate() {
            if v > s[best] {
                best = c;
            }
        }
        best
    }
}

/// Trains one binary logistic model per class with per-sample SGD, visiting
/// the training nodes in a freshly shuffled order every epoch.
pub fn train_ovr_logreg(
    features: &Embedding<f64>,
    labels: &[Option<ClassId>],
    train: &[NodeId],
    num_classes: usize,
    params: &LogRegParams,
    rng: &mut Rng,
) -> Result<OvrClassifier, EvalError> {
    if num_classes < 2 {
        return Err(EvalError::TooFewClasses(num_classes));
    }
    if train.is_empty() {
        return Err(EvalError::Empty);
    }
    if !features.is_finite() {
        return Err(EvalError::NonFinite);
    }
    let d = features.dims();
    let mut mean = vec![0.0; d];
    let mut inv_std = vec![1.0; d];
    if params.standardize {
        for &v in train {
            for (m, x) in mean.iter_mut().zip(features.row(v)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= train.len() as f64);
        let mut var = vec![0.0; d];
        for &v in train {
            for ((s, x), m) in var.iter_mut().zip(features.row(v)).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        for (is, s) in inv_std.iter_mut().zip(var) {
            let sd = (s / train.len() as f64).sqrt();
            *is = if sd > 1e-12 { 1.0 / sd } else { 1.0 };
        }
    }
    let mut support = vec![0usize; num_classes];
    for &v in train {
        if let Some(c) = labels[v] {
            support[c] += 1;
        }
    }
    for (c, &n) in support.iter().enumerate() {
        if n == 0 {
            warn!("class {c} has no training examples; it is trained on negatives only");
        }
    }
    let labeled = support.iter().sum::<usize>() as f64;
    // Biases start at the smoothed log-odds of each class prior.
    let biases = support
        .iter()
        .map(|&n| {
            let prior = (n as f64 + 1.0) / (labeled + 2.0);
            (prior / (1.0 - prior)).ln()
        })
        .collect();

    let mut clf = OvrClassifier {
        dims: d,
        weights: vec![0.0; num_classes * d],
        biases,
        mean,
        inv_std,
    };
    let mut order: Vec<NodeId> = train.iter().copied().filter(|&v| labels[v].is_some()).collect();
    let mut z = vec![0.0; d];
    for _ in 0..params.epochs {
        order.shuffle(rng);
        for &v in &order {
            let y_class = labels[v].expect("filtered to labeled nodes");
            clf.transform(features.row(v), &mut z);
            for c in 0..num_classes {
                let w = &mut clf.weights[c * d..(c + 1) * d];
                let score = w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + clf.biases[c];
                let y = if c == y_class { 1.0 } else { 0.0 };
                let g = sigmoid(score) - y;
                for (wi, &zi) in w.iter_mut().zip(&z) {
                    *wi -= params.lr * (g * zi + params.l2 * *wi);
                }
                clf.biases[c] -= params.lr * g;
            }
        }
    }
    Ok(clf)
}

/// Number of classes implied by a label vector.
pub fn class_count(labels: &[Option<ClassId>]) -> usize {
    labels.iter().flatten().max().map_or(0, |&m| m + 1)
}

/// Splits the labeled nodes, trains the classifier and scores the test split.
pub fn evaluate_split(
    features: &Embedding<f64>,
    labels: &[Option<ClassId>],
    params: &LogRegParams,
    rng: &mut Rng,
) -> Result<F1Report, EvalError> {
    let labeled: Vec<NodeId> = (0..labels.len()).filter(|&v| labels[v].is_some()).collect();
    let k = class_count(labels);
    let split = LabeledSplit::new(labeled, params.train_fraction, rng);
    if split.test.is_empty() {
        return Err(EvalError::Empty);
    }
    let clf = train_ovr_logreg(features, labels, &split.train, k, params, rng)?;
    let preds: Vec<ClassId> = split.test.iter().map(|&v| clf.predict(features.row(v))).collect();
    let truth: Vec<ClassId> = split.test.iter().map(|&v| labels[v].unwrap()).collect();
    f1_scores(&preds, &truth, k)
}

/// Mean and sample standard deviation over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Summary {
    pub trials: usize,
    pub micro_mean: f64,
    pub micro_std: f64,
    pub macro_mean: f64,
    pub macro_std: f64,
}

pub fn summarize(reports: &[F1Report]) -> Result<F1Summary, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::NoTrials);
    }
    let stats = |xs: Vec<f64>| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean, var.sqrt())
    };
    let (micro_mean, micro_std) = stats(reports.iter().map(|r| r.micro_f1).collect());
    let (macro_mean, macro_std) = stats(reports.iter().map(|r| r.macro_f1).collect());
    Ok(F1Summary {
        trials: reports.len(),
        micro_mean,
        micro_std,
        macro_mean,
        macro_std,
    })
}
