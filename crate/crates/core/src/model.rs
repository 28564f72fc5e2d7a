//! The linear encoder `Z = F_smoothed · W⁽¹⁾ ⋯ W⁽ˡ⁾` and multi-scale
//! aggregation of per-level embeddings.
//!
//! There are no biases and no nonlinearities. A multi-scale model keeps one
//! independent weight stack per smoothing level `1..=k`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{substream, Purpose};
use crate::scalar::Scalar;

/// How per-scale embeddings are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Aggregator {
    /// Single scale at depth `k` (plain SCE).
    #[default]
    None,
    Concat,
    Mean,
    Max,
}

impl Aggregator {
    pub fn name(self) -> &'static str {
        match self {
            Aggregator::None => "none",
            Aggregator::Concat => "concat",
            Aggregator::Mean => "mean",
            Aggregator::Max => "max",
        }
    }

    /// Smoothing depths feeding each scale.
    pub fn levels(self, k: usize) -> Vec<usize> {
        match self {
            Aggregator::None => vec![k],
            _ => (1..=k).collect(),
        }
    }
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Aggregator::None),
            "concat" => Ok(Aggregator::Concat),
            "mean" => Ok(Aggregator::Mean),
            "max" => Ok(Aggregator::Max),
            other => Err(Error::Config(format!(
                "unknown aggregator {other:?} (expected none, concat, mean or max)"
            ))),
        }
    }
}

impl std::fmt::Display for Aggregator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Weight stacks, one per scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub scales: Vec<Vec<DenseMatrix<T>>>,
}

impl<T: Scalar> ModelParams<T> {
    /// Glorot-uniform initialization: each `W` is drawn i.i.d. from
    /// `(-√(6/(fan_in+fan_out)), √(6/(fan_in+fan_out)))`.
    ///
    /// `dims_per_scale[s]` lists the chain `f → d₁ → … → d_l` of scale `s`.
    /// Every matrix has its own random stream, so results do not depend on
    /// the number of scales or layers before it.
    pub fn init(dims_per_scale: &[Vec<usize>], seed: u64) -> Result<Self> {
        if dims_per_scale.is_empty() {
            return Err(Error::Config("at least one scale is required".into()));
        }
        let mut scales = Vec::with_capacity(dims_per_scale.len());
        for (s, dims) in dims_per_scale.iter().enumerate() {
            if dims.len() < 2 {
                return Err(Error::Config(format!(
                    "scale {s}: layer dims need at least an input and an output size, got {dims:?}"
                )));
            }
            if dims.contains(&0) {
                return Err(Error::Config(format!(
                    "scale {s}: zero layer dimension in {dims:?}"
                )));
            }
            let stack = dims
                .windows(2)
                .enumerate()
                .map(|(layer, w)| {
                    let mut rng = substream(seed, Purpose::Init, ((s as u64) << 16) | layer as u64);
                    glorot_uniform(w[0], w[1], &mut rng)
                })
                .collect();
            scales.push(stack);
        }
        Ok(Self { scales })
    }

    pub fn num_scales(&self) -> usize {
        self.scales.len()
    }

    /// `‖θ‖²`: sum of squares over every weight entry.
    pub fn l2(&self) -> T {
        self.weights().map(DenseMatrix::sum_squares).sum()
    }

    pub fn weights(&self) -> impl Iterator<Item = &DenseMatrix<T>> {
        self.scales.iter().flatten()
    }

    pub fn weights_mut(&mut self) -> impl Iterator<Item = &mut DenseMatrix<T>> {
        self.scales.iter_mut().flatten()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            scales: self
                .scales
                .iter()
                .map(|stack| {
                    stack
                        .iter()
                        .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
                        .collect()
                })
                .collect(),
        }
    }

    /// Output width of each scale.
    pub fn output_dims(&self) -> Vec<usize> {
        self.scales
            .iter()
            .map(|stack| stack.last().map_or(0, DenseMatrix::cols))
            .collect()
    }
}

fn glorot_uniform<T: Scalar, R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> DenseMatrix<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    DenseMatrix::from_fn(fan_in, fan_out, |_, _| loop {
        let v = rng.random_range(-limit..limit);
        // Open interval: reject the closed lower end.
        if v > -limit {
            break T::of(v);
        }
    })
}

/// `x · W⁽¹⁾ ⋯ W⁽ˡ⁾`
pub fn forward<T: Scalar>(x: &DenseMatrix<T>, stack: &[DenseMatrix<T>]) -> Result<DenseMatrix<T>> {
    let mut out = x.clone();
    for (layer, w) in stack.iter().enumerate() {
        out = out.matmul(w).map_err(|e| match e {
            Error::Dimension(msg) => Error::Dimension(format!("layer {layer}: {msg}")),
            other => other,
        })?;
    }
    Ok(out)
}

/// Combines per-scale embeddings.
///
/// `Concat` appends column blocks in scale order; `Mean` and `Max` are
/// element-wise and need equal shapes; `None` accepts exactly one input.
pub fn aggregate<T: Scalar>(parts: &[DenseMatrix<T>], mode: Aggregator) -> Result<DenseMatrix<T>> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Dimension("nothing to aggregate".into()))?;
    let rows = first.rows();
    if let Some(bad) = parts.iter().find(|p| p.rows() != rows) {
        return Err(Error::Dimension(format!(
            "aggregate: row counts differ ({rows} vs {})",
            bad.rows()
        )));
    }
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    match mode {
        Aggregator::None => Err(Error::Dimension(format!(
            "single-scale model given {} embeddings",
            parts.len()
        ))),
        Aggregator::Concat => {
            let total: usize = parts.iter().map(DenseMatrix::cols).sum();
            let mut out = DenseMatrix::zeros(rows, total);
            for i in 0..rows {
                let mut at = 0;
                for p in parts {
                    out.row_mut(i)[at..at + p.cols()].copy_from_slice(p.row(i));
                    at += p.cols();
                }
            }
            Ok(out)
        }
        Aggregator::Mean | Aggregator::Max => {
            if let Some(bad) = parts.iter().find(|p| p.shape() != first.shape()) {
                return Err(Error::Dimension(format!(
                    "{mode} pooling needs equal shapes, got {:?} and {:?}",
                    first.shape(),
                    bad.shape()
                )));
            }
            let mut out = first.clone();
            for p in &parts[1..] {
                for (o, &v) in out.data_mut().iter_mut().zip(p.data()) {
                    *o = if mode == Aggregator::Mean {
                        *o + v
                    } else {
                        o.max(v)
                    };
                }
            }
            if mode == Aggregator::Mean {
                let inv = T::of(parts.len() as f64).recip();
                out = out.scaled(inv);
            }
            Ok(out)
        }
    }
}

/// Full encoder: one forward pass per scale, then aggregation.
///
/// `inputs[s]` is the smoothed feature matrix feeding scale `s`.
pub fn embed<T: Scalar>(
    inputs: &[DenseMatrix<T>],
    params: &ModelParams<T>,
    mode: Aggregator,
) -> Result<DenseMatrix<T>> {
    if inputs.len() != params.num_scales() {
        return Err(Error::Dimension(format!(
            "{} input levels for {} scales",
            inputs.len(),
            params.num_scales()
        )));
    }
    let parts = inputs
        .iter()
        .zip(&params.scales)
        .map(|(x, stack)| forward(x, stack))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&parts, mode)
}
