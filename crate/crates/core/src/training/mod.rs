//! Negative sampling, the negative-pair objectives, Adam, and the
//! full-batch and mini-batch training loops.

mod adam;
mod config;
mod loss;
mod negatives;
mod trainer;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use config::{parse_dims, parse_key_values, TrainConfig};
pub use loss::{
    evaluate, evaluate_loss, loss_gradient, negative_distance_loss, pair_distance_sum, sce_loss,
    total_loss, total_loss_with, Evaluation, LossKind, Objective, DEGENERACY_THRESHOLD,
};
pub use negatives::{sample_negatives, NegativePairSet};
pub use trainer::{smoothed_inputs, train, train_minibatch, train_on_inputs, TrainOutput};
