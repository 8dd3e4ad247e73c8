//! Scenario orchestration: static ("all") and streamed ("seq") training,
//! parameter sweeps and the per-walk timing benchmark.

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Embedding;
use crate::eval::{self, ClassId, EvalError, F1Report, LogRegParams};
use crate::graph::{Graph, GraphError, NodeId};
use crate::oselm::{
    Denominator, HiddenMode, OselmConfig, OselmError, OselmModel, ParameterCount, UpdateMode,
    WalkReport,
};
use crate::rng::SeedStream;
use crate::sampler::{NegativePolicy, NegativeSampler, TablePolicy};
use crate::scalar::Scalar;
use crate::sgd::{SgdError, SgdModel};
use crate::walk::{random_walk, Walk, WalkConfig, WalkError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oselm(#[from] OselmError),
    #[error(transparent)]
    Sgd(#[from] SgdError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    All,
    Seq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// OS-ELM skip-gram.
    Proposed,
    /// SGD skip-gram.
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub model: ModelKind,
    pub dims: usize,
    pub walk: WalkConfig,
    /// Negatives per positive.
    pub ns: usize,
    pub mu: f64,
    pub mode: HiddenMode,
    pub update: UpdateMode,
    pub negatives: NegativePolicy,
    pub table_policy: TablePolicy,
    /// Exponent applied to appearance counts for the negative distribution.
    pub exponent: f64,
    pub p0_scale: f64,
    pub denominator: Denominator,
    /// SGD learning rate of the original model.
    pub lr: f64,
    /// Walks started from each endpoint of a streamed edge.
    pub walks_per_endpoint: usize,
    /// Evaluate every this many streamed edges (seq only).
    pub eval_every: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub eval: LogRegParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::All,
            model: ModelKind::Proposed,
            dims: 32,
            walk: WalkConfig::default(),
            ns: 10,
            mu: 0.01,
            mode: HiddenMode::Tied,
            update: UpdateMode::Sequential,
            negatives: NegativePolicy::Fresh,
            table_policy: TablePolicy::every(1).expect("nonzero"),
            exponent: 1.0,
            p0_scale: 1.0,
            denominator: Denominator::Regularized,
            lr: 0.01,
            walks_per_endpoint: 1,
            eval_every: None,
            seed: 0,
            trials: 3,
            eval: LogRegParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.walk.validate()?;
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.dims == 0 {
            return bad("dims must be at least 1");
        }
        if self.ns == 0 {
            return bad("ns must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.exponent.is_finite() && self.exponent >= 0.0) {
            return bad("exponent must be non-negative");
        }
        if self.eval_every == Some(0) {
            return bad("eval_every must be positive");
        }
        Ok(())
    }

    fn oselm(&self) -> OselmConfig {
        OselmConfig {
            dims: self.dims,
            mu: self.mu,
            mode: self.mode,
            p0_scale: self.p0_scale,
            denominator: self.denominator,
        }
    }
}

/// Either trainable skip-gram, behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Trainer<T> {
    Proposed {
        model: OselmModel<T>,
        update: UpdateMode,
    },
    Original(SgdModel<T>),
}

impl<T: Scalar> Trainer<T> {
    pub fn new<R: rand::Rng + ?Sized>(
        cfg: &ExperimentConfig,
        nodes: usize,
        rng: &mut R,
    ) -> Result<Self, ExperimentError> {
        Ok(match cfg.model {
            ModelKind::Proposed => Trainer::Proposed {
                model: OselmModel::new(&cfg.oselm(), nodes, rng)?,
                update: cfg.update,
            },
            ModelKind::Original => Trainer::Original(SgdModel::new(cfg.dims, nodes, cfg.lr, rng)?),
        })
    }

    pub fn train_walk(
        &mut self,
        contexts: &[crate::walk::WalkContext<'_>],
        negatives: &crate::sampler::WalkNegatives,
    ) -> WalkReport {
        match self {
            Trainer::Proposed { model, update } => model.train_walk(contexts, negatives, *update),
            Trainer::Original(model) => model.train_walk(contexts, negatives),
        }
    }

    pub fn embedding(&self) -> Embedding<T> {
        match self {
            Trainer::Proposed { model, .. } => model.embedding_snapshot(),
            Trainer::Original(model) => model.embedding_snapshot(),
        }
    }

    pub fn parameter_count(&self) -> ParameterCount {
        match self {
            Trainer::Proposed { model, .. } => model.parameter_count(),
            Trainer::Original(model) => model.parameter_count(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Trainer::Proposed { model, .. } => model.is_finite(),
            Trainer::Original(model) => model.is_finite(),
        }
    }
}

/// Summary of per-walk training times, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TimingStats {
    pub samples: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
}

impl TimingStats {
    pub fn from_seconds(times: &[f64]) -> Self {
        if times.is_empty() {
            return TimingStats::default();
        }
        let mut ms: Vec<f64> = times.iter().map(|t| t * 1e3).collect();
        ms.sort_by(f64::total_cmp);
        let n = ms.len();
        let pick = |q: f64| ms[((q * (n - 1) as f64).round() as usize).min(n - 1)];
        TimingStats {
            samples: n,
            mean_ms: ms.iter().sum::<f64>() / n as f64,
            median_ms: pick(0.5),
            p95_ms: pick(0.95),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicEval {
    pub trial: usize,
    pub edges_streamed: usize,
    pub micro_f1: f64,
    pub macro_f1: f64,
}

/// One self-describing result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub label: String,
    pub config: ExperimentConfig,
    pub micro_f1_mean: f64,
    pub micro_f1_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
    pub trial_micro_f1: Vec<f64>,
    pub trial_macro_f1: Vec<f64>,
    pub parameters: ParameterCount,
    /// Walks trained per trial.
    pub walks_trained: usize,
    /// Walks trained per trial during the edge stream.
    pub stream_walks: usize,
    pub edges_streamed: usize,
    pub table_rebuilds: usize,
    pub skipped_contexts: usize,
    pub periodic: Vec<PeriodicEval>,
    /// Wall-clock field; excluded from reproducibility comparisons.
    pub walk_time: TimingStats,
}

impl MetricsRecord {
    /// The record with wall-clock fields zeroed.
    pub fn without_timing(&self) -> MetricsRecord {
        MetricsRecord {
            walk_time: TimingStats::default(),
            ..self.clone()
        }
    }

    pub const CSV_HEADER: &'static str = "label,scenario,model,dims,mu,mode,update,negatives,table_policy,seed,trials,micro_f1_mean,micro_f1_std,macro_f1_mean,macro_f1_std,walks_trained,stream_walks,edges_streamed,table_rebuilds,skipped_contexts,trainable,state,fixed";

    pub const TIMING_CSV_HEADER: &'static str = "label,model,update,dims,walks,mean_ms,median_ms,p95_ms";

    pub fn csv_row(&self) -> String {
        let c = &self.config;
        let tag = |v: &dyn erased::Tag| v.tag();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{},{},{}",
            self.label,
            tag(&c.scenario),
            tag(&c.model),
            c.dims,
            c.mu,
            tag(&c.mode),
            tag(&c.update),
            tag(&c.negatives),
            c.table_policy,
            c.seed,
            c.trials,
            self.micro_f1_mean,
            self.micro_f1_std,
            self.macro_f1_mean,
            self.macro_f1_std,
            self.walks_trained,
            self.stream_walks,
            self.edges_streamed,
            self.table_rebuilds,
            self.skipped_contexts,
            self.parameters.trainable,
            self.parameters.state,
            self.parameters.fixed,
        )
    }

    /// Wall-clock row, kept apart so metrics files stay reproducible.
    pub fn timing_csv_row(&self) -> String {
        let c = &self.config;
        let tag = |v: &dyn erased::Tag| v.tag();
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.label,
            tag(&c.model),
            tag(&c.update),
            c.dims,
            self.walk_time.samples,
            self.walk_time.mean_ms,
            self.walk_time.median_ms,
            self.walk_time.p95_ms,
        )
    }
}

mod erased {
    use serde::Serialize;

    /// Serde name of a unit enum variant.
    pub trait Tag {
        fn tag(&self) -> String;
    }

    impl<T: Serialize> Tag for T {
        fn tag(&self) -> String {
            match serde_json::to_value(self) {
                Ok(serde_json::Value::String(s)) => s,
                Ok(other) => other.to_string(),
                Err(_) => String::new(),
            }
        }
    }
}

/// State of one training run (one trial).
pub struct Session<T> {
    pub trainer: Trainer<T>,
    pub sampler: NegativeSampler,
    pub walks_trained: usize,
    pub stream_walks: usize,
    pub edges_streamed: usize,
    pub skipped_contexts: usize,
    pub walk_times: Vec<f64>,
    pub periodic: Vec<PeriodicEval>,
    streams: SeedStream,
    walk_rng: crate::rng::Rng,
    neg_rng: crate::rng::Rng,
}

impl<T: Scalar> Session<T> {
    fn new(cfg: &ExperimentConfig, nodes: usize, trial: u64) -> Result<Self, ExperimentError> {
        let streams = SeedStream::new(cfg.seed);
        let trainer = Trainer::new(cfg, nodes, &mut streams.rng("init", trial))?;
        Ok(Session {
            trainer,
            sampler: NegativeSampler::new(nodes, cfg.exponent, cfg.table_policy),
            walks_trained: 0,
            stream_walks: 0,
            edges_streamed: 0,
            skipped_contexts: 0,
            walk_times: Vec::new(),
            periodic: Vec::new(),
            streams,
            walk_rng: streams.rng("walks", trial),
            neg_rng: streams.rng("negatives", trial),
        })
    }

    /// Negatives are drawn before the clock starts; only training is timed.
    fn train(&mut self, cfg: &ExperimentConfig, walk: &Walk) {
        let ctxs = walk.contexts(cfg.walk.window);
        let negs = self.sampler.negatives_for_walk(
            ctxs.len(),
            cfg.walk.window - 1,
            cfg.ns,
            cfg.negatives,
            &mut self.neg_rng,
        );
        let start = Instant::now();
        let report = self.trainer.train_walk(&ctxs, &negs);
        self.walk_times.push(start.elapsed().as_secs_f64());
        self.skipped_contexts += report.skipped;
        self.walks_trained += 1;
    }

    pub fn embedding(&self) -> Embedding<T> {
        self.trainer.embedding()
    }
}

/// Static training: `r` rounds over all nodes in shuffled order. All walks
/// are drawn first, the negative table is built from their node counts, and
/// the walks are then trained in order.
pub fn train_static<T: Scalar>(
    g: &Graph,
    cfg: &ExperimentConfig,
    trial: u64,
) -> Result<Session<T>, ExperimentError> {
    cfg.validate()?;
    let n = g.node_count();
    let mut session = Session::new(cfg, n, trial)?;
    let mut order_rng = session.streams.rng("order", trial);
    let mut order: Vec<NodeId> = (0..n).collect();
    let mut walks = Vec::with_capacity(n * cfg.walk.walks_per_node);
    for _ in 0..cfg.walk.walks_per_node {
        order.shuffle(&mut order_rng);
        for &start in &order {
            walks.push(random_walk(g, start, &cfg.walk, &mut session.walk_rng));
        }
    }
    if !walks.is_empty() {
        for w in &walks {
            session.sampler.observe(w.nodes());
        }
        session.sampler.rebuild();
    }
    for w in &walks {
        session.train(cfg, w);
    }
    Ok(session)
}

/// Streamed training: the BFS spanning forest is trained as in
/// [`train_static`], then every deferred edge is inserted and followed by
/// walks from both of its endpoints.
pub fn train_stream<T: Scalar>(
    g_full: &Graph,
    cfg: &ExperimentConfig,
    trial: u64,
    labels: Option<&[Option<ClassId>]>,
) -> Result<(Session<T>, usize), ExperimentError> {
    cfg.validate()?;
    let streams = SeedStream::new(cfg.seed);
    let stream = g_full.spanning_forest_split(streams.seed("forest", trial));
    let mut graph = stream.initial_graph();
    let mut session = train_static::<T>(&graph, cfg, trial)?;
    let mut eval_rng = streams.rng("periodic", trial);
    for e in &stream.deferred_edges {
        graph.add_edge(e.u, e.v, e.weight)?;
        let mut walks = Vec::with_capacity(2 * cfg.walks_per_endpoint);
        for start in [e.u, e.v] {
            for _ in 0..cfg.walks_per_endpoint {
                walks.push(random_walk(&graph, start, &cfg.walk, &mut session.walk_rng));
            }
        }
        for w in &walks {
            session.sampler.observe(w.nodes());
        }
        session.sampler.edge_added();
        for w in &walks {
            session.train(cfg, w);
            session.stream_walks += 1;
        }
        session.edges_streamed += 1;
        if let (Some(k), Some(labels)) = (cfg.eval_every, labels) {
            if session.edges_streamed % k == 0 {
                let r = eval::evaluate_split(&session.embedding().to_f64(), labels, &cfg.eval, &mut eval_rng)?;
                session.periodic.push(PeriodicEval {
                    trial: trial as usize,
                    edges_streamed: session.edges_streamed,
                    micro_f1: r.micro_f1,
                    macro_f1: r.macro_f1,
                });
            }
        }
    }
    Ok((session, stream.deferred_edges.len()))
}

/// Result of a multi-trial run: the record plus the last trial's model.
pub struct RunOutcome<T> {
    pub record: MetricsRecord,
    pub reports: Vec<F1Report>,
    pub last: Trainer<T>,
}

/// Trains `cfg.trials` embeddings from scratch for the configured scenario
/// and evaluates each on a fresh split.
pub fn run<T: Scalar>(
    g: &Graph,
    labels: &[Option<ClassId>],
    cfg: &ExperimentConfig,
    label: &str,
) -> Result<RunOutcome<T>, ExperimentError> {
    cfg.validate()?;
    let streams = SeedStream::new(cfg.seed);
    let mut reports = Vec::with_capacity(cfg.trials);
    let mut times = Vec::new();
    let mut last = None;
    let (mut walks, mut stream_walks, mut edges, mut rebuilds, mut skipped) = (0, 0, 0, 0, 0);
    let mut periodic = Vec::new();
    for trial in 0..cfg.trials as u64 {
        let session = match cfg.scenario {
            Scenario::All => train_static::<T>(g, cfg, trial)?,
            Scenario::Seq => train_stream::<T>(g, cfg, trial, Some(labels))?.0,
        };
        if !session.trainer.is_finite() {
            log::warn!("{label}: trial {trial} produced non-finite weights");
        }
        let report = eval::evaluate_split(
            &session.embedding().to_f64(),
            labels,
            &cfg.eval,
            &mut streams.rng("split", trial),
        )?;
        log::info!(
            "{label}: trial {trial} micro-F1 {:.4} macro-F1 {:.4}",
            report.micro_f1,
            report.macro_f1
        );
        reports.push(report);
        times.extend_from_slice(&session.walk_times);
        walks = session.walks_trained;
        stream_walks = session.stream_walks;
        edges = session.edges_streamed;
        rebuilds = session.sampler.stream_rebuilds();
        skipped += session.skipped_contexts;
        periodic.extend(session.periodic);
        last = Some(session.trainer);
    }
    let last = last.expect("at least one trial");
    let summary = eval::summarize(&reports)?;
    let record = MetricsRecord {
        label: label.to_string(),
        config: cfg.clone(),
        micro_f1_mean: summary.micro_mean,
        micro_f1_std: summary.micro_std,
        macro_f1_mean: summary.macro_mean,
        macro_f1_std: summary.macro_std,
        trial_micro_f1: reports.iter().map(|r| r.micro_f1).collect(),
        trial_macro_f1: reports.iter().map(|r| r.macro_f1).collect(),
        parameters: last.parameter_count(),
        walks_trained: walks,
        stream_walks,
        edges_streamed: edges,
        table_rebuilds: rebuilds,
        skipped_contexts: skipped,
        periodic,
        walk_time: TimingStats::from_seconds(&times),
    };
    Ok(RunOutcome {
        record,
        reports,
        last,
    })
}

pub fn run_all<T: Scalar>(
    g: &Graph,
    labels: &[Option<ClassId>],
    cfg: &ExperimentConfig,
) -> Result<RunOutcome<T>, ExperimentError> {
    let cfg = ExperimentConfig {
        scenario: Scenario::All,
        ..cfg.clone()
    };
    run(g, labels, &cfg, "all")
}

pub fn run_seq<T: Scalar>(
    g: &Graph,
    labels: &[Option<ClassId>],
    cfg: &ExperimentConfig,
) -> Result<RunOutcome<T>, ExperimentError> {
    let cfg = ExperimentConfig {
        scenario: Scenario::Seq,
        ..cfg.clone()
    };
    run(g, labels, &cfg, "seq")
}

/// One proposed-model record per `mu`, then one with fixed random input weights.
pub fn sweep_mu<T: Scalar>(
    g: &Graph,
    labels: &[Option<ClassId>],
    cfg: &ExperimentConfig,
    mu_values: &[f64],
) -> Result<Vec<MetricsRecord>, ExperimentError> {
    if mu_values.is_empty() {
        return Err(ExperimentError::Config("mu sweep needs at least one value".into()));
    }
    let base = ExperimentConfig {
        model: ModelKind::Proposed,
        ..cfg.clone()
    };
    let mut out = Vec::with_capacity(mu_values.len() + 1);
    for &mu in mu_values {
        let c = ExperimentConfig {
            mu,
            mode: HiddenMode::Tied,
            ..base.clone()
        };
        out.push(run::<T>(g, labels, &c, &format!("mu={mu}"))?.record);
    }
    let alpha = ExperimentConfig {
        mode: HiddenMode::RandomAlpha,
        ..base
    };
    out.push(run::<T>(g, labels, &alpha, "alpha")?.record);
    Ok(out)
}

/// One streamed run per table-refresh policy.
pub fn sweep_table_update<T: Scalar>(
    g: &Graph,
    labels: &[Option<ClassId>],
    cfg: &ExperimentConfig,
    policies: &[TablePolicy],
) -> Result<Vec<MetricsRecord>, ExperimentError> {
    policies
        .iter()
        .map(|&p| {
            let c = ExperimentConfig {
                scenario: Scenario::Seq,
                table_policy: p,
                ..cfg.clone()
            };
            run::<T>(g, labels, &c, &format!("refresh={p}")).map(|o| o.record)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub model: ModelKind,
    pub update: UpdateMode,
    pub dims: usize,
    pub contexts_per_walk: usize,
    pub timing: TimingStats,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str =
        "model,update,dims,contexts_per_walk,reps,mean_ms,median_ms,p95_ms";

    pub fn csv_row(&self) -> String {
        use erased::Tag;
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.model.tag(),
            self.update.tag(),
            self.dims,
            self.contexts_per_walk,
            self.timing.samples,
            self.timing.mean_ms,
            self.timing.median_ms,
            self.timing.p95_ms
        )
    }
}

pub const MIN_BENCH_REPS: usize = 10;
const BENCH_WARMUP: usize = 3;

/// Times the training of single full-length walks for both models at each
/// dimension. Walk generation and negative drawing happen outside the clock.
pub fn bench_walk<T: Scalar>(
    g: &Graph,
    cfg: &ExperimentConfig,
    dims: &[usize],
    repetitions: usize,
) -> Result<Vec<BenchRecord>, ExperimentError> {
    if repetitions < MIN_BENCH_REPS {
        return Err(ExperimentError::Config(format!(
            "bench needs at least {MIN_BENCH_REPS} repetitions, got {repetitions}"
        )));
    }
    cfg.validate()?;
    let streams = SeedStream::new(cfg.seed);
    let mut walk_rng = streams.rng("walks", 0);
    let mut neg_rng = streams.rng("negatives", 0);
    let candidates: Vec<NodeId> = (0..g.node_count()).filter(|&v| g.degree(v) > 0).collect();
    if candidates.is_empty() {
        return Err(ExperimentError::Config("bench graph has no edges".into()));
    }
    let need = repetitions + BENCH_WARMUP;
    let mut walks = Vec::with_capacity(need);
    let mut sampler = NegativeSampler::new(g.node_count(), cfg.exponent, TablePolicy::Never);
    for i in 0.. {
        if walks.len() == need {
            break;
        }
        if i > 100 * need {
            return Err(ExperimentError::Config("could not draw full-length walks".into()));
        }
        let start = candidates[i % candidates.len()];
        let w = random_walk(g, start, &cfg.walk, &mut walk_rng);
        if w.len() == cfg.walk.walk_length {
            sampler.observe(w.nodes());
            walks.push(w);
        }
    }
    sampler.rebuild();
    let n_ctx = cfg.walk.contexts_per_walk(cfg.walk.walk_length);
    let negs: Vec<_> = walks
        .iter()
        .map(|_| sampler.negatives_for_walk(n_ctx, cfg.walk.window - 1, cfg.ns, cfg.negatives, &mut neg_rng))
        .collect();

    let mut out = Vec::new();
    for &d in dims {
        for model in [ModelKind::Proposed, ModelKind::Original] {
            let c = ExperimentConfig {
                model,
                dims: d,
                ..cfg.clone()
            };
            let mut trainer = Trainer::<T>::new(&c, g.node_count(), &mut streams.rng("init", 0))?;
            let mut times = Vec::with_capacity(repetitions);
            for (i, (w, n)) in walks.iter().zip(&negs).enumerate() {
                let ctxs = w.contexts(cfg.walk.window);
                let start = Instant::now();
                trainer.train_walk(&ctxs, n);
                let t = start.elapsed().as_secs_f64();
                if i >= BENCH_WARMUP {
                    times.push(t);
                }
            }
            out.push(BenchRecord {
                model,
                update: cfg.update,
                dims: d,
                contexts_per_walk: n_ctx,
                timing: TimingStats::from_seconds(&times),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn two_cliques() -> (Graph, Vec<Option<ClassId>>) {
        let mut edges = Vec::new();
        for base in [0, 6] {
            for i in 0..6 {
                for j in i + 1..6 {
                    edges.push(Edge::unit(base + i, base + j));
                }
            }
        }
        edges.push(Edge::unit(0, 6));
        let labels = (0..12).map(|v| Some(usize::from(v >= 6))).collect();
        (Graph::from_edges(12, edges).unwrap(), labels)
    }

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            dims: 4,
            walk: WalkConfig {
                walks_per_node: 2,
                walk_length: 10,
                window: 3,
                ..WalkConfig::default()
            },
            ns: 2,
            trials: 1,
            eval: LogRegParams {
                epochs: 5,
                train_fraction: 0.75,
                ..LogRegParams::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn walk_accounting_all() {
        let (g, labels) = two_cliques();
        let out = run_all::<f64>(&g, &labels, &small_cfg()).unwrap();
        assert_eq!(out.record.walks_trained, 2 * 12);
        assert_eq!(out.record.stream_walks, 0);
    }

    #[test]
    fn walk_accounting_seq() {
        let (g, labels) = two_cliques();
        let deferred = g.edge_count() - 11;
        let out = run_seq::<f64>(&g, &labels, &small_cfg()).unwrap();
        assert_eq!(out.record.edges_streamed, deferred);
        assert_eq!(out.record.stream_walks, 2 * deferred);
        assert_eq!(out.record.walks_trained, 2 * 12 + 2 * deferred);
        assert_eq!(out.record.table_rebuilds, deferred);
    }

    #[test]
    fn zero_walks_leave_model_untrained() {
        let (g, labels) = two_cliques();
        let cfg = ExperimentConfig {
            walk: WalkConfig {
                walks_per_node: 0,
                ..small_cfg().walk
            },
            ..small_cfg()
        };
        let s = train_static::<f64>(&g, &cfg, 0).unwrap();
        assert_eq!(s.walks_trained, 0);
        let fresh = Trainer::<f64>::new(&cfg, 12, &mut SeedStream::new(0).rng("init", 0)).unwrap();
        assert_eq!(s.trainer, fresh);
        let _ = labels;
    }

    #[test]
    fn seq_on_tree_equals_all() {
        let tree = Graph::from_edges(
            6,
            [Edge::unit(0, 1), Edge::unit(0, 2), Edge::unit(1, 3), Edge::unit(1, 4), Edge::unit(2, 5)],
        )
        .unwrap();
        let labels: Vec<Option<ClassId>> = (0..6).map(|v| Some(v % 2)).collect();
        let cfg = small_cfg();
        let all = train_static::<f64>(&tree, &cfg, 0).unwrap();
        let (seq, deferred) = train_stream::<f64>(&tree, &cfg, 0, Some(&labels)).unwrap();
        assert_eq!(deferred, 0);
        assert_eq!(all.trainer, seq.trainer);
    }

    #[test]
    fn determinism() {
        let (g, labels) = two_cliques();
        let cfg = ExperimentConfig {
            scenario: Scenario::Seq,
            ..small_cfg()
        };
        let a = run::<f64>(&g, &labels, &cfg, "x").unwrap();
        let b = run::<f64>(&g, &labels, &cfg, "x").unwrap();
        assert_eq!(a.record.without_timing(), b.record.without_timing());
        assert_eq!(a.last, b.last);
    }

    #[test]
    fn sweeps_shape() {
        let (g, labels) = two_cliques();
        let recs = sweep_mu::<f64>(&g, &labels, &small_cfg(), &[0.01]).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].config.mode, HiddenMode::RandomAlpha);
        assert!(sweep_mu::<f64>(&g, &labels, &small_cfg(), &[]).is_err());
        let t = sweep_table_update::<f64>(&g, &labels, &small_cfg(), &[TablePolicy::every(1).unwrap(), TablePolicy::Never]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].table_rebuilds, 0);
    }

    #[test]
    fn bench_requires_min_reps() {
        let (g, _) = two_cliques();
        assert!(bench_walk::<f64>(&g, &small_cfg(), &[4], 9).is_err());
        let r = bench_walk::<f64>(&g, &small_cfg(), &[4, 8], 10).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|b| b.timing.samples == 10 && b.contexts_per_walk == 8));
    }

    #[test]
    fn csv_row_matches_header() {
        let (g, labels) = two_cliques();
        let rec = run_all::<f64>(&g, &labels, &small_cfg()).unwrap().record;
        let cols = MetricsRecord::CSV_HEADER.split(',').count();
        assert_eq!(rec.csv_row().split(',').count(), cols);
        assert!(rec.csv_row().starts_with("all,all,proposed,4,"));
    }

    #[test]
    fn timing_stats() {
        let t = TimingStats::from_seconds(&[0.001, 0.002, 0.003]);
        assert_eq!(t.samples, 3);
        assert!((t.mean_ms - 2.0).abs() < 1e-12);
        assert!((t.median_ms - 2.0).abs() < 1e-12);
    }
}
