//! Graph embeddings trained against a sparsest-cut style contrastive
//! objective, with multi-scale aggregation, exact cut oracles and a linear
//! evaluation probe.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the command-line tool uses.

pub mod cut;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod smoothing;
pub mod training;

pub use cut::{
    brute_force_sparsest_cut, edge_expansion, edge_expansion_prime, expansion_ratio,
    full_pair_distance_sum, sparsification_check, CutIndicator, CutObjective, CutResult,
    SparsificationReport, BRUTE_FORCE_LIMIT,
};
pub use data::{gen_features, gen_sbm, load_dataset, read_matrix, write_matrix, Dataset};
pub use error::{Error, Result};
pub use eval::{logistic_probe, make_splits, micro_f1, LabeledSplit, ProbeConfig, ProbeResult};
pub use graph::{load_edge_list, write_edge_list, Graph, LoadedGraph};
pub use matrix::DenseMatrix;
pub use model::{aggregate, embed, forward, Aggregator, ModelParams};
pub use scalar::Scalar;
pub use smoothing::SmoothingOperator;
pub use training::{
    sce_loss, train, train_minibatch, LossKind, NegativePairSet, Objective, TrainConfig,
    TrainOutput,
};

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type Params = ModelParams<f64>;
pub type Params32 = ModelParams<f32>;
pub type Smoother<'g> = SmoothingOperator<'g, f64>;
