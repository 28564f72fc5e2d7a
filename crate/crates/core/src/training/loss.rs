//! Negative-pair objectives and their analytic gradients.
//!
//! With `S = Σ_{(i,j) ∈ 𝒩} ‖z_i - z_j‖²`, the default unsupervised loss is
//! `1 / S`; the ablation loss is `-S`. Both are weighted by `alpha`, and
//! `beta · ‖θ‖²` is added on top.

use crate::error::{Error, Result};
use crate::graph::squared_distance;
use crate::matrix::DenseMatrix;
use crate::model::{aggregate, Aggregator, ModelParams};
use crate::scalar::Scalar;

use super::negatives::NegativePairSet;

/// Pair-distance sums below this are treated as a collapsed embedding.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Unsupervised objective applied to the negative-pair distance sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LossKind {
    /// `1 / S`
    #[default]
    Sce,
    /// `-S`
    NegativeDistance,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Sce => "sce",
            LossKind::NegativeDistance => "negative",
        }
    }

    /// Loss value as a function of `S`.
    fn value<T: Scalar>(self, sum: T) -> Result<T> {
        match self {
            LossKind::Sce => {
                check_degenerate(sum)?;
                Ok(sum.recip())
            }
            LossKind::NegativeDistance => Ok(-sum),
        }
    }

    /// `dL/dS`
    fn slope<T: Scalar>(self, sum: T) -> Result<T> {
        match self {
            LossKind::Sce => {
                check_degenerate(sum)?;
                Ok(-(sum * sum).recip())
            }
            LossKind::NegativeDistance => Ok(-T::one()),
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sce" => Ok(LossKind::Sce),
            "negative" => Ok(LossKind::NegativeDistance),
            other => Err(Error::Config(format!(
                "unknown loss {other:?} (expected sce or negative)"
            ))),
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_degenerate<T: Scalar>(sum: T) -> Result<()> {
    if sum < T::of(DEGENERACY_THRESHOLD) {
        return Err(Error::DegenerateEmbedding(format!(
            "negative-pair distance sum {sum} is below {DEGENERACY_THRESHOLD:e}"
        )));
    }
    Ok(())
}

/// `S = Σ_{(i,j) ∈ 𝒩} ‖z_i - z_j‖²`
pub fn pair_distance_sum<T: Scalar>(z: &DenseMatrix<T>, neg: &NegativePairSet) -> Result<T> {
    neg.check_bounds(z.rows())?;
    Ok(neg
        .pairs()
        .iter()
        .map(|&(i, j)| squared_distance(z.row(i), z.row(j)))
        .sum())
}

/// `1 / Σ_{(i,j) ∈ 𝒩} ‖z_i - z_j‖²`
pub fn sce_loss<T: Scalar>(z: &DenseMatrix<T>, neg: &NegativePairSet) -> Result<T> {
    LossKind::Sce.value(pair_distance_sum(z, neg)?)
}

/// `-Σ_{(i,j) ∈ 𝒩} ‖z_i - z_j‖²`
pub fn negative_distance_loss<T: Scalar>(z: &DenseMatrix<T>, neg: &NegativePairSet) -> Result<T> {
    LossKind::NegativeDistance.value(pair_distance_sum(z, neg)?)
}

/// `alpha · sce_loss + beta · ‖θ‖²`
pub fn total_loss<T: Scalar>(
    z: &DenseMatrix<T>,
    neg: &NegativePairSet,
    params: &ModelParams<T>,
    alpha: f64,
    beta: f64,
) -> Result<T> {
    total_loss_with(z, neg, params, alpha, beta, LossKind::Sce)
}

/// `alpha · L_unsup + beta · ‖θ‖²` for either unsupervised loss.
pub fn total_loss_with<T: Scalar>(
    z: &DenseMatrix<T>,
    neg: &NegativePairSet,
    params: &ModelParams<T>,
    alpha: f64,
    beta: f64,
    kind: LossKind,
) -> Result<T> {
    let unsup = kind.value(pair_distance_sum(z, neg)?)?;
    Ok(T::of(alpha) * unsup + T::of(beta) * params.l2())
}

/// Weights and loss selection for one objective evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub alpha: f64,
    pub beta: f64,
    pub kind: LossKind,
    pub aggregator: Aggregator,
}

/// Loss value alongside the gradient it was computed with.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub total: T,
    /// Unweighted unsupervised term.
    pub unsup: T,
    /// `‖θ‖²`
    pub l2: T,
    pub pair_sum: T,
    pub grads: ModelParams<T>,
}

/// Embeddings for the given inputs together with every per-scale
/// intermediate product needed for back-propagation.
struct Trace<T> {
    /// `acts[s][j] = inputs[s] · W⁽¹⁾ ⋯ W⁽ʲ⁺¹⁾`
    acts: Vec<Vec<DenseMatrix<T>>>,
    z: DenseMatrix<T>,
}

fn trace<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    params: &ModelParams<T>,
    aggregator: Aggregator,
) -> Result<Trace<T>> {
    if inputs.len() != params.num_scales() {
        return Err(Error::Dimension(format!(
            "{} input levels for {} scales",
            inputs.len(),
            params.num_scales()
        )));
    }
    let mut acts = Vec::with_capacity(inputs.len());
    for (x, stack) in inputs.iter().zip(&params.scales) {
        let mut layer_outputs: Vec<DenseMatrix<T>> = Vec::with_capacity(stack.len());
        for w in stack {
            let prev = layer_outputs.last().unwrap_or(x);
            let next = prev.matmul(w)?;
            layer_outputs.push(next);
        }
        acts.push(layer_outputs);
    }
    let outputs: Vec<DenseMatrix<T>> = acts
        .iter()
        .map(|a| {
            a.last()
                .cloned()
                .ok_or_else(|| Error::Config("empty weight stack".into()))
        })
        .collect::<Result<_>>()?;
    let z = aggregate(&outputs, aggregator)?;
    if !z.is_finite() {
        return Err(Error::DegenerateEmbedding(
            "embedding has non-finite entries".into(),
        ));
    }
    Ok(Trace { acts, z })
}

/// Total loss and its exact gradient with respect to every weight matrix.
///
/// `inputs[s]` is the (fixed) smoothed feature matrix of scale `s`. The
/// gradient with respect to `z_i` is `dL/dS · 2 Σ (z_i - z_j)` over the pairs
/// touching `i`; it is routed back through the aggregation (max pooling sends
/// it to the winning scale, lowest index on ties) and the linear stacks.
pub fn evaluate<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    params: &ModelParams<T>,
    neg: &NegativePairSet,
    objective: &Objective,
) -> Result<Evaluation<T>> {
    let Trace { acts, z } = trace(inputs, params, objective.aggregator)?;
    let pair_sum = pair_distance_sum(&z, neg)?;
    let unsup = objective.kind.value(pair_sum)?;
    let l2 = params.l2();
    let alpha = T::of(objective.alpha);
    let beta = T::of(objective.beta);
    let total = alpha * unsup + beta * l2;

    // dL/dZ
    let coef = alpha * objective.kind.slope(pair_sum)? * T::of(2.0);
    let mut dz = DenseMatrix::zeros(z.rows(), z.cols());
    if coef != T::zero() {
        for &(i, j) in neg.pairs() {
            for c in 0..z.cols() {
                let diff = coef * (z[(i, c)] - z[(j, c)]);
                dz[(i, c)] += diff;
                dz[(j, c)] -= diff;
            }
        }
    }

    let outputs: Vec<&DenseMatrix<T>> = acts.iter().map(|a| a.last().expect("nonempty")).collect();
    let per_scale = split_gradient(&dz, &outputs, objective.aggregator);

    let mut grads = params.zeros_like();
    for (s, mut g) in per_scale.into_iter().enumerate() {
        let stack = &params.scales[s];
        for j in (0..stack.len()).rev() {
            let prev = if j == 0 { &inputs[s] } else { &acts[s][j - 1] };
            let mut gw = prev.t_matmul(&g)?;
            gw.add_scaled(&stack[j], T::of(2.0) * beta)?;
            grads.scales[s][j] = gw;
            if j > 0 {
                g = g.matmul_t(&stack[j])?;
            }
        }
    }

    Ok(Evaluation {
        total,
        unsup,
        l2,
        pair_sum,
        grads,
    })
}

/// Gradient of the total loss with respect to every weight matrix.
pub fn loss_gradient<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    params: &ModelParams<T>,
    neg: &NegativePairSet,
    objective: &Objective,
) -> Result<ModelParams<T>> {
    evaluate(inputs, params, neg, objective).map(|e| e.grads)
}

/// Loss only; no gradient work.
pub fn evaluate_loss<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    params: &ModelParams<T>,
    neg: &NegativePairSet,
    objective: &Objective,
) -> Result<T> {
    let z = trace(inputs, params, objective.aggregator)?.z;
    total_loss_with(
        &z,
        neg,
        params,
        objective.alpha,
        objective.beta,
        objective.kind,
    )
}

/// Pulls the aggregated gradient back to each scale's output.
fn split_gradient<T: Scalar>(
    dz: &DenseMatrix<T>,
    outputs: &[&DenseMatrix<T>],
    aggregator: Aggregator,
) -> Vec<DenseMatrix<T>> {
    if outputs.len() == 1 {
        return vec![dz.clone()];
    }
    match aggregator {
        Aggregator::None | Aggregator::Concat => {
            let mut at = 0;
            outputs
                .iter()
                .map(|o| {
                    let block = dz.column_block(at, o.cols());
                    at += o.cols();
                    block
                })
                .collect()
        }
        Aggregator::Mean => {
            let share = dz.scaled(T::of(outputs.len() as f64).recip());
            vec![share; outputs.len()]
        }
        Aggregator::Max => {
            let mut parts = vec![DenseMatrix::zeros(dz.rows(), dz.cols()); outputs.len()];
            for idx in 0..dz.data().len() {
                let mut winner = 0;
                for s in 1..outputs.len() {
                    if outputs[s].data()[idx] > outputs[winner].data()[idx] {
                        winner = s;
                    }
                }
                parts[winner].data_mut()[idx] = dz.data()[idx];
            }
            parts
        }
    }
}
