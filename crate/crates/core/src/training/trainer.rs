use rand::seq::index;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;
use crate::model::{Aggregator, ModelParams};
use crate::rng::{stream, Purpose};
use crate::scalar::Scalar;
use crate::smoothing::SmoothingOperator;

use super::adam::{adam_step, AdamState};
use super::config::TrainConfig;
use super::loss::{evaluate, evaluate_loss, Objective};
use super::negatives::{sample_negatives, sample_negatives_with, NegativePairSet};

/// Trained weights and the loss trajectory.
#[derive(Clone, Debug)]
pub struct TrainOutput<T> {
    pub params: ModelParams<T>,
    /// Total loss before the first update.
    pub initial_loss: T,
    /// Total loss after each epoch's update.
    pub loss_history: Vec<T>,
}

/// Smoothed feature matrices feeding each scale of the configured encoder:
/// `[F^(k)]` for a single scale, `[F^(1), …, F^(k)]` otherwise.
pub fn smoothed_inputs<T: Scalar>(
    graph: &Graph,
    features: &DenseMatrix<T>,
    config: &TrainConfig,
) -> Result<Vec<DenseMatrix<T>>> {
    let op = SmoothingOperator::new(graph, config.k);
    match config.aggregator {
        Aggregator::None => Ok(vec![op.smooth(features)?]),
        _ => op.smooth_all_scales(features),
    }
}

/// Smooths once, then trains. `batch_size = 0` runs full-batch epochs;
/// anything else delegates to [`train_minibatch`].
pub fn train<T: Scalar>(
    graph: &Graph,
    features: &DenseMatrix<T>,
    config: &TrainConfig,
) -> Result<TrainOutput<T>> {
    config.validate(graph.num_nodes(), features.cols())?;
    let inputs = smoothed_inputs(graph, features, config)?;
    train_on_inputs(&inputs, config)
}

/// Mini-batch training; requires `2 <= batch_size <= n`.
pub fn train_minibatch<T: Scalar>(
    graph: &Graph,
    features: &DenseMatrix<T>,
    config: &TrainConfig,
) -> Result<TrainOutput<T>> {
    if config.batch_size < 2 {
        return Err(Error::Config(format!(
            "mini-batch training needs batch_size >= 2, got {}",
            config.batch_size
        )));
    }
    train(graph, features, config)
}

/// Trains on precomputed smoothed inputs (one matrix per scale).
pub fn train_on_inputs<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    config: &TrainConfig,
) -> Result<TrainOutput<T>> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::Config("no input levels".into()))?;
    config.validate(first.rows(), first.cols())?;
    let dims = config.dims_per_scale();
    if dims.len() != inputs.len() {
        return Err(Error::Dimension(format!(
            "{} input levels for {} scales",
            inputs.len(),
            dims.len()
        )));
    }
    let params = ModelParams::init(&dims, config.seed)?;
    if config.batch_size == 0 {
        full_batch(inputs, params, config)
    } else {
        mini_batch(inputs, params, config)
    }
}

fn objective(config: &TrainConfig) -> Objective {
    Objective {
        alpha: config.alpha,
        beta: config.beta,
        kind: config.loss,
        aggregator: config.aggregator,
    }
}

fn at_epoch(epoch: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::AtEpoch {
        epoch,
        source: Box::new(e),
    }
}

fn full_batch<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    mut params: ModelParams<T>,
    config: &TrainConfig,
) -> Result<TrainOutput<T>> {
    let objective = objective(config);
    let neg = sample_negatives(inputs[0].rows(), config.neg_per_node, config.seed)?;
    let mut state = AdamState::new(&params);
    let mut current = evaluate(inputs, &params, &neg, &objective).map_err(at_epoch(0))?;
    let initial_loss = current.total;
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        adam_step(&mut params, &current.grads, &mut state, config.lr)?;
        current = evaluate(inputs, &params, &neg, &objective).map_err(at_epoch(epoch))?;
        loss_history.push(current.total);
    }
    Ok(TrainOutput {
        params,
        initial_loss,
        loss_history,
    })
}

/// One epoch is `ceil(n / b)` steps. Each step draws `b` distinct rows and
/// `neg_per_node` in-batch partners per drawn row, and updates on that batch
/// alone. The recorded epoch loss is the post-update loss on the epoch's
/// final batch.
fn mini_batch<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    mut params: ModelParams<T>,
    config: &TrainConfig,
) -> Result<TrainOutput<T>> {
    let objective = objective(config);
    let n = inputs[0].rows();
    let b = config.batch_size;
    let steps = n.div_ceil(b);
    let mut rows_rng = stream(config.seed, Purpose::Batches);
    let mut pairs_rng = stream(config.seed, Purpose::Negatives);
    let mut draw = |epoch: usize| -> Result<(Vec<DenseMatrix<T>>, NegativePairSet)> {
        let mut rows = index::sample(&mut rows_rng, n, b).into_vec();
        rows.sort_unstable();
        let batch = inputs
            .iter()
            .map(|x| x.select_rows(&rows))
            .collect::<Result<Vec<_>>>()?;
        let neg = sample_negatives_with(b, config.neg_per_node, &mut pairs_rng)
            .map_err(at_epoch(epoch))?;
        Ok((batch, neg))
    };

    let mut state = AdamState::new(&params);
    let (batch, neg) = draw(0)?;
    let initial_loss = evaluate_loss(&batch, &params, &neg, &objective).map_err(at_epoch(0))?;
    let mut pending = Some((batch, neg));
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let mut last = None;
        for _ in 0..steps {
            let (batch, neg) = match pending.take() {
                Some(drawn) => drawn,
                None => draw(epoch)?,
            };
            let eval = evaluate(&batch, &params, &neg, &objective).map_err(at_epoch(epoch))?;
            adam_step(&mut params, &eval.grads, &mut state, config.lr)?;
            last = Some((batch, neg));
        }
        let (batch, neg) = last.expect("at least one step per epoch");
        let loss = evaluate_loss(&batch, &params, &neg, &objective).map_err(at_epoch(epoch))?;
        loss_history.push(loss);
    }
    Ok(TrainOutput {
        params,
        initial_loss,
        loss_history,
    })
}
