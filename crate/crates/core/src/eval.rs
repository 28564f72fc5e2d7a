//! Downstream evaluation: per-class random splits and a multinomial
//! logistic-regression probe on frozen embeddings.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{substream, Purpose};
use crate::scalar::Scalar;

/// One random train/test split of the labeled nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSplit {
    /// Sorted ascending.
    pub train_idx: Vec<usize>,
    /// Every labeled node not in `train_idx`, sorted ascending.
    pub test_idx: Vec<usize>,
    pub labels: Vec<Option<usize>>,
    pub num_classes: usize,
}

impl LabeledSplit {
    pub fn label(&self, node: usize) -> usize {
        self.labels[node].expect("split indices only reference labeled nodes")
    }
}

/// Number of classes implied by the labels (largest id plus one).
pub fn num_classes(labels: &[Option<usize>]) -> usize {
    labels.iter().flatten().max().map_or(0, |&c| c + 1)
}

/// Draws `per_class` training nodes from every class, uniformly without
/// replacement; all other labeled nodes form the test set. Split `s` uses its
/// own random stream, so the first splits do not change with `num_splits`.
pub fn make_splits(
    labels: &[Option<usize>],
    per_class: usize,
    num_splits: usize,
    seed: u64,
) -> Result<Vec<LabeledSplit>> {
    let classes = num_classes(labels);
    let mut members = vec![Vec::new(); classes];
    for (node, label) in labels.iter().enumerate() {
        if let Some(c) = label {
            members[*c].push(node);
        }
    }
    if let Some((c, m)) = members
        .iter()
        .enumerate()
        .find(|(_, m)| m.len() < per_class)
    {
        return Err(Error::Data(format!(
            "class {c} has {} labeled nodes, fewer than the {per_class} requested per class",
            m.len()
        )));
    }

    (0..num_splits)
        .map(|s| {
            let mut rng = substream(seed, Purpose::Splits, s as u64);
            let mut in_train = vec![false; labels.len()];
            for m in &members {
                for pick in index::sample(&mut rng, m.len(), per_class) {
                    in_train[m[pick]] = true;
                }
            }
            let labeled = (0..labels.len()).filter(|&i| labels[i].is_some());
            let (train_idx, test_idx): (Vec<usize>, Vec<usize>) =
                labeled.partition(|&i| in_train[i]);
            Ok(LabeledSplit {
                train_idx,
                test_idx,
                labels: labels.to_vec(),
                num_classes: classes,
            })
        })
        .collect()
}

/// Micro-averaged F1 with true/false positives and false negatives pooled
/// across classes. For single-label predictions this equals accuracy.
pub fn micro_f1(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let tp = pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64;
    // A wrong prediction is a false positive for the predicted class and a
    // false negative for the true class.
    let wrong = pred.len() as f64 - tp;
    let (fp, fn_) = (wrong, wrong);
    if tp == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp / (2.0 * tp + fp + fn_))
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Logistic-regression probe settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    /// Weight of the `‖W‖²` penalty (the bias is not penalized).
    pub l2: f64,
    pub iters: usize,
    pub lr: f64,
    /// Z-score every embedding column (statistics over all rows) first.
    pub standardize: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            iters: 300,
            lr: 0.1,
            standardize: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeResult<T> {
    pub accuracy: f64,
    pub micro_f1: f64,
    /// `d × C`
    pub weights: DenseMatrix<T>,
    pub bias: Vec<T>,
    /// Test-node predictions, aligned with `split.test_idx`.
    pub predictions: Vec<usize>,
    /// Training objective before each iteration, then after the last one.
    pub loss_history: Vec<T>,
}

/// Trains softmax regression (mean cross-entropy plus `l2 · ‖W‖²`) on the
/// split's training rows by full-batch gradient descent from zero weights,
/// then scores the test rows. Ties in the arg-max go to the lowest class id.
pub fn logistic_probe<T: Scalar>(
    z: &DenseMatrix<T>,
    split: &LabeledSplit,
    config: &ProbeConfig,
) -> Result<ProbeResult<T>> {
    if config.iters == 0 {
        return Err(Error::Config(
            "the probe needs at least one iteration".into(),
        ));
    }
    if z.rows() != split.labels.len() {
        return Err(Error::Dimension(format!(
            "embedding has {} rows, labels cover {} nodes",
            z.rows(),
            split.labels.len()
        )));
    }
    let classes = split.num_classes;
    let train_labels: Vec<usize> = split.train_idx.iter().map(|&i| split.label(i)).collect();
    let distinct = {
        let mut seen = vec![false; classes];
        train_labels.iter().for_each(|&c| seen[c] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::Data(format!(
            "training set covers {distinct} class(es); the probe needs at least two"
        )));
    }

    let z = if config.standardize {
        standardize(z)
    } else {
        z.clone()
    };
    let x = z.select_rows(&split.train_idx)?;
    let (m, d) = x.shape();
    let inv_m = T::of(m as f64).recip();
    let (lr, l2) = (T::of(config.lr), T::of(config.l2));

    let mut w = DenseMatrix::<T>::zeros(d, classes);
    let mut bias = vec![T::zero(); classes];
    let mut loss_history = Vec::with_capacity(config.iters + 1);
    for _ in 0..config.iters {
        let (probs, loss) = softmax_loss(&x, &w, &bias, &train_labels);
        loss_history.push(loss + l2 * w.sum_squares());
        // residual = (P - Y) / m
        let mut residual = probs;
        for (r, &c) in train_labels.iter().enumerate() {
            residual[(r, c)] -= T::one();
        }
        let residual = residual.scaled(inv_m);
        let mut grad_w = x.t_matmul(&residual)?;
        grad_w.add_scaled(&w, T::of(2.0) * l2)?;
        w.add_scaled(&grad_w, -lr)?;
        for (c, b) in bias.iter_mut().enumerate() {
            let g: T = (0..m).map(|r| residual[(r, c)]).sum();
            *b -= lr * g;
        }
    }
    let (_, loss) = softmax_loss(&x, &w, &bias, &train_labels);
    loss_history.push(loss + l2 * w.sum_squares());

    let test = z.select_rows(&split.test_idx)?;
    let logits = test.matmul(&w)?;
    let predictions: Vec<usize> = (0..test.rows())
        .map(|r| argmax(logits.row(r), &bias))
        .collect();
    let truth: Vec<usize> = split.test_idx.iter().map(|&i| split.label(i)).collect();
    Ok(ProbeResult {
        accuracy: accuracy(&predictions, &truth)?,
        micro_f1: micro_f1(&predictions, &truth)?,
        weights: w,
        bias,
        predictions,
        loss_history,
    })
}

fn argmax<T: Scalar>(logits: &[T], bias: &[T]) -> usize {
    let mut best = 0;
    let mut best_value = logits[0] + bias[0];
    for c in 1..logits.len() {
        let v = logits[c] + bias[c];
        if v > best_value {
            best = c;
            best_value = v;
        }
    }
    best
}

/// Row-wise softmax probabilities and mean cross-entropy.
fn softmax_loss<T: Scalar>(
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    bias: &[T],
    labels: &[usize],
) -> (DenseMatrix<T>, T) {
    let mut probs = x.matmul(w).expect("probe shapes agree");
    let mut loss = T::zero();
    for (r, &label) in labels.iter().enumerate() {
        let row = probs.row_mut(r);
        for (v, &b) in row.iter_mut().zip(bias) {
            *v += b;
        }
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut norm = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            norm += *v;
        }
        loss += norm.ln() - (row[label].ln());
        for v in row.iter_mut() {
            *v /= norm;
        }
    }
    (probs, loss / T::of(labels.len() as f64))
}

/// Centers each column and scales it to unit variance; constant columns
/// become zero.
pub fn standardize<T: Scalar>(z: &DenseMatrix<T>) -> DenseMatrix<T> {
    let (n, d) = z.shape();
    if n == 0 {
        return z.clone();
    }
    let inv_n = T::of(n as f64).recip();
    let mut out = z.clone();
    for j in 0..d {
        let mean = (0..n).map(|i| z[(i, j)]).sum::<T>() * inv_n;
        let var = (0..n)
            .map(|i| {
                let c = z[(i, j)] - mean;
                c * c
            })
            .sum::<T>()
            * inv_n;
        let scale = if var > T::zero() {
            var.sqrt().recip()
        } else {
            T::zero()
        };
        for i in 0..n {
            out[(i, j)] = (z[(i, j)] - mean) * scale;
        }
    }
    out
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
