//! Command-line driver.

use std::error::Error;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::config::{Precision, RunConfig};
use crate::dataset::{self, Dataset, NodeDictionary};
use crate::eval;
use crate::experiment::{self, ExperimentConfig, MetricsRecord, ModelKind, Scenario};
use crate::graph::Graph;
use crate::io::{export_embedding, import_embedding, write_atomic, write_bench, write_metrics};
use crate::rng::SeedStream;
use crate::scalar::Scalar;
use crate::synthetic::PlantedPartition;

pub type CliResult<T> = Result<T, Box<dyn Error>>;

#[derive(Debug, Parser)]
#[command(name = "seqn2v", version, about = "Sequentially trainable node2vec embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by the training subcommands. Precedence, lowest first:
/// built-in defaults, `--config` file, `--set` pairs, named flags.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Dataset directory (`edges.txt`, `labels.txt`, `nodes.txt`, or raw Cora files).
    #[arg(long, value_name = "DIR")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = ["proposed", "original"])]
    pub model: Option<String>,
    #[arg(long, value_parser = ["sequential", "dataflow"])]
    pub update: Option<String>,
    /// Embedding dimension; `bench` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_parser = ["f32", "f64"])]
    pub precision: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a raw dataset into edges.txt, labels.txt and nodes.txt.
    Convert {
        #[arg(long, default_value = "cora", value_parser = ["cora", "edgelist"])]
        format: String,
        /// Raw dataset directory (cora) or edge-list file (edgelist).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Train on the full graph.
    Train(Common),
    /// Train on a spanning forest, then stream in the remaining edges.
    Stream(Common),
    /// Score an exported embedding with the node classifier.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        embedding: PathBuf,
    },
    /// Runs over the configured mu values plus random input weights, in the configured scenario.
    SweepMu(Common),
    /// Streamed runs over the configured negative-table refresh policies.
    SweepTableUpdate(Common),
    /// Per-walk training time of both models.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Write the embedding held in a checkpoint as text.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
    },
}

impl Common {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut rc = RunConfig::default();
        if let Some(path) = &self.config {
            rc.apply_file(path)?;
        }
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got `{pair}`"))?;
            rc.set(k.trim(), v.trim())?;
        }
        let named = [
            ("dataset", self.dataset.as_ref().map(|p| p.display().to_string())),
            ("seed", self.seed.map(|s| s.to_string())),
            ("model", self.model.clone()),
            ("update", self.update.clone()),
            ("mu", self.mu.map(|m| m.to_string())),
            ("trials", self.trials.map(|t| t.to_string())),
            ("precision", self.precision.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                rc.set(k, &v)?;
            }
        }
        match self.dims[..] {
            [] => {}
            [d] => {
                rc.experiment.dims = d;
                rc.bench_dims = vec![d];
            }
            _ => rc.bench_dims = self.dims.clone(),
        }
        Ok(rc)
    }
}

fn out_dir(rc: &RunConfig) -> PathBuf {
    rc.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn require_dataset(rc: &RunConfig) -> CliResult<Dataset> {
    let dir = rc
        .dataset
        .as_ref()
        .ok_or("no dataset given; pass --dataset DIR or set `dataset` in the config")?;
    let ds = dataset::load_dir(dir)?;
    log::info!(
        "{}: {} nodes, {} edges ({} edge lines), {} classes",
        ds.name,
        ds.stats.nodes,
        ds.stats.unique_edges,
        ds.stats.edge_lines,
        ds.stats.classes
    );
    Ok(ds)
}

fn echo_config(rc: &RunConfig, dir: &Path) -> CliResult<()> {
    let text = rc.to_text();
    print!("{text}");
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join("config.txt"), |w| w.write_all(text.as_bytes()))?;
    Ok(())
}

fn print_record(r: &MetricsRecord) {
    println!(
        "{}: micro-F1 {:.4} ± {:.4}, macro-F1 {:.4} ± {:.4} over {} trials",
        r.label, r.micro_f1_mean, r.micro_f1_std, r.macro_f1_mean, r.macro_f1_std, r.config.trials
    );
}

fn train_cmd<T: Scalar>(rc: &RunConfig, scenario: Scenario) -> CliResult<()> {
    let ds = require_dataset(rc)?;
    let dir = out_dir(rc);
    echo_config(rc, &dir)?;
    let cfg = ExperimentConfig {
        scenario,
        ..rc.experiment.clone()
    };
    let label = match scenario {
        Scenario::All => "all",
        Scenario::Seq => "seq",
    };
    let outcome = experiment::run::<T>(&ds.graph, &ds.labels, &cfg, label)?;
    write_metrics(&dir, std::slice::from_ref(&outcome.record))?;
    export_embedding(&dir.join("embedding.txt"), &outcome.last.embedding(), &ds.dictionary)?;
    save_checkpoint(&dir.join("model.ckpt"), &outcome.last)?;
    print_record(&outcome.record);
    Ok(())
}

fn sweep_cmd<T: Scalar>(rc: &RunConfig, mu: bool) -> CliResult<()> {
    let ds = require_dataset(rc)?;
    let dir = out_dir(rc);
    echo_config(rc, &dir)?;
    let records = if mu {
        experiment::sweep_mu::<T>(&ds.graph, &ds.labels, &rc.experiment, &rc.mu_values)?
    } else {
        experiment::sweep_table_update::<T>(&ds.graph, &ds.labels, &rc.experiment, &rc.table_policies)?
    };
    write_metrics(&dir, &records)?;
    records.iter().for_each(print_record);
    Ok(())
}

fn bench_cmd<T: Scalar>(rc: &RunConfig) -> CliResult<()> {
    let graph: Graph = match &rc.dataset {
        Some(_) => require_dataset(rc)?.graph,
        None => {
            log::info!("no dataset given; benchmarking on a Cora-sized planted-partition graph");
            PlantedPartition::cora_like().generate(rc.experiment.seed).0
        }
    };
    let records = experiment::bench_walk::<T>(&graph, &rc.experiment, &rc.bench_dims, rc.reps)?;
    let dir = out_dir(rc);
    fs::create_dir_all(&dir)?;
    write_bench(&dir.join("bench.csv"), &records)?;
    println!("{}", experiment::BenchRecord::CSV_HEADER);
    for r in &records {
        println!("{}", r.csv_row());
    }
    for &d in &rc.bench_dims {
        let mean = |m| {
            records
                .iter()
                .find(|r| r.dims == d && r.model == m)
                .map(|r| r.timing.mean_ms)
        };
        if let (Some(p), Some(o)) = (mean(ModelKind::Proposed), mean(ModelKind::Original)) {
            println!("# d={d}: original/proposed time ratio {:.3}", o / p);
        }
    }
    Ok(())
}

fn eval_cmd(rc: &RunConfig, embedding: &Path) -> CliResult<()> {
    let ds = require_dataset(rc)?;
    let (dict, emb) = import_embedding(embedding)?;
    let mut aligned = crate::embedding::Embedding::<f64>::zeros(ds.graph.node_count(), emb.dims());
    for v in 0..ds.graph.node_count() {
        let id = ds.dictionary.original(v);
        let row = dict.dense(id).ok_or_else(|| format!("embedding has no row for node `{id}`"))?;
        aligned.row_mut(v).copy_from_slice(emb.row(row));
    }
    let streams = SeedStream::new(rc.experiment.seed);
    let reports = (0..rc.experiment.trials as u64)
        .map(|t| eval::evaluate_split(&aligned, &ds.labels, &rc.experiment.eval, &mut streams.rng("split", t)))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = eval::summarize(&reports)?;
    let json = serde_json::to_string(&summary)?;
    println!("{json}");
    if let Some(dir) = &rc.out {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join("eval.json"), |w| writeln!(w, "{json}"))?;
    }
    Ok(())
}

fn export_cmd<T: Scalar>(rc: &RunConfig, checkpoint: &Path) -> CliResult<()> {
    let trainer = load_checkpoint::<T>(checkpoint)?;
    let emb = trainer.embedding();
    let dict = match &rc.dataset {
        Some(_) => require_dataset(rc)?.dictionary,
        None => NodeDictionary::from_ids((0..emb.rows()).map(|v| v.to_string())),
    };
    let path = match &rc.out {
        Some(p) if p.extension().is_some() => p.clone(),
        Some(dir) => {
            fs::create_dir_all(dir)?;
            dir.join("embedding.txt")
        }
        None => PathBuf::from("embedding.txt"),
    };
    export_embedding(&path, &emb, &dict)?;
    println!("wrote {} ({} x {})", path.display(), emb.rows(), emb.dims());
    Ok(())
}

fn convert_cmd(format: &str, input: &Path, out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let (dict, edges, labels) = match format {
        "cora" => {
            let conv = dataset::convert_cora_dir(input)?;
            if conv.dropped_edges > 0 {
                log::warn!("dropped {} edges with unknown endpoints", conv.dropped_edges);
            }
            (conv.dictionary, conv.edges, Some(conv.labels))
        }
        _ => {
            let mut dict = NodeDictionary::new();
            let file = fs::File::open(input).map_err(|e| format!("{}: {e}", input.display()))?;
            let list = dataset::read_edge_list(std::io::BufReader::new(file), &mut dict, true)?;
            let edges = list
                .edges
                .iter()
                .map(|e| (dict.original(e.u).to_string(), dict.original(e.v).to_string()))
                .collect();
            (dict, edges, None)
        }
    };
    write_atomic(&out.join("edges.txt"), |w| {
        for (u, v) in &edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    })?;
    write_atomic(&out.join("nodes.txt"), |w| dict.write(w))?;
    if let Some(labels) = &labels {
        write_atomic(&out.join("labels.txt"), |w| {
            for (v, c) in labels {
                writeln!(w, "{v} {c}")?;
            }
            Ok(())
        })?;
    }
    let ds = dataset::load_dir(out)?;
    println!("{}", serde_json::to_string(&ds.stats)?);
    Ok(())
}

macro_rules! with_precision {
    ($rc:expr, $f:ident ( $($arg:expr),* )) => {
        match $rc.precision {
            Precision::F32 => $f::<f32>($($arg),*),
            Precision::F64 => $f::<f64>($($arg),*),
        }
    };
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Convert { format, input, out } => convert_cmd(&format, &input, &out),
        Command::Train(c) => {
            let rc = c.resolve()?;
            with_precision!(rc, train_cmd(&rc, Scenario::All))
        }
        Command::Stream(c) => {
            let rc = c.resolve()?;
            with_precision!(rc, train_cmd(&rc, Scenario::Seq))
        }
        Command::Eval { common, embedding } => eval_cmd(&common.resolve()?, &embedding),
        Command::SweepMu(c) => {
            let rc = c.resolve()?;
            with_precision!(rc, sweep_cmd(&rc, true))
        }
        Command::SweepTableUpdate(c) => {
            let rc = c.resolve()?;
            with_precision!(rc, sweep_cmd(&rc, false))
        }
        Command::Bench { common, reps } => {
            let mut rc = common.resolve()?;
            if let Some(r) = reps {
                rc.reps = r;
            }
            with_precision!(rc, bench_cmd(&rc))
        }
        Command::Export { common, checkpoint } => {
            let rc = common.resolve()?;
            with_precision!(rc, export_cmd(&rc, &checkpoint))
        }
    }
}
