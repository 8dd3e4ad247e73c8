//! Sequentially trainable node2vec.
//!
//! Second-order random walks feed a skip-gram whose output layer is trained
//! by an online sequential extreme learning machine (recursive least squares)
//! with tied input weights. Edges can be added after initial training and the
//! model keeps learning from walks around them. A plain SGD skip-gram and a
//! logistic-regression node classifier are included for comparison.
//!
//! The trainable models are generic over [`Scalar`] (`f32` or `f64`).

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod embedding;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod oselm;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod sgd;
pub mod synthetic;
pub mod walk;

pub use embedding::Embedding;
pub use experiment::{ExperimentConfig, MetricsRecord, ModelKind, Scenario, Trainer};
pub use graph::{Edge, Graph, NodeId};
pub use oselm::{Denominator, HiddenMode, OselmConfig, OselmModel, UpdateMode};
pub use rng::SeedStream;
pub use sampler::{AliasTable, NegativePolicy, NegativeSampler, TablePolicy};
pub use scalar::Scalar;
pub use sgd::SgdModel;
pub use walk::{Walk, WalkConfig};

pub type OselmModelF32 = OselmModel<f32>;
pub type OselmModelF64 = OselmModel<f64>;
pub type SgdModelF32 = SgdModel<f32>;
pub type SgdModelF64 = SgdModel<f64>;
pub type TrainerF32 = Trainer<f32>;
pub type TrainerF64 = Trainer<f64>;
pub type EmbeddingF32 = Embedding<f32>;
pub type EmbeddingF64 = Embedding<f64>;
