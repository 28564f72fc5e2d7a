//! Exact cut quantities: edge expansion and its product-normalized variant,
//! exhaustive sparsest cut on small graphs, the all-pairs distance sum
//! `Tr(Zᵀ L_K Z)`, and an empirical check of pair-sampling sparsification.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{squared_distance, Graph};
use crate::matrix::DenseMatrix;
use crate::rng::{stream, Purpose};
use crate::scalar::Scalar;

/// Largest graph accepted by [`brute_force_sparsest_cut`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Membership vector of a node subset `S`; `true` marks members.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CutIndicator {
    bits: Vec<bool>,
}

impl CutIndicator {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_members(n: usize, members: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &m in members {
            if m >= n {
                return Err(Error::Index { index: m, n });
            }
            bits[m] = true;
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of members, `|S|`.
    pub fn size(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Sorted member ids.
    pub fn members(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    fn from_mask(n: usize, mask: u32) -> Self {
        Self {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }
}

/// Which expansion objective a cut is scored by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutObjective {
    /// `|E(S, S̄)| / min(|S|, |S̄|)`
    Phi,
    /// `|E(S, S̄)| / (|S| · |S̄|)`
    PhiPrime,
}

impl CutObjective {
    pub fn name(self) -> &'static str {
        match self {
            CutObjective::Phi => "phi",
            CutObjective::PhiPrime => "phi_prime",
        }
    }

    fn ratio(self, cut: u64, size: u64, n: u64) -> Ratio<u64> {
        let other = n - size;
        let denom = match self {
            CutObjective::Phi => size.min(other),
            CutObjective::PhiPrime => size * other,
        };
        Ratio::new(cut, denom)
    }
}

impl std::str::FromStr for CutObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" => Ok(CutObjective::Phi),
            "phi_prime" | "phi-prime" => Ok(CutObjective::PhiPrime),
            other => Err(Error::Config(format!(
                "unknown cut objective {other:?} (expected phi or phi_prime)"
            ))),
        }
    }
}

/// Minimizer found by [`brute_force_sparsest_cut`].
#[derive(Clone, Debug, PartialEq)]
pub struct CutResult {
    pub best_set: CutIndicator,
    /// Exact objective value of `best_set`.
    pub ratio: Ratio<u64>,
    /// `ratio` evaluated in floating point.
    pub value: f64,
    pub objective: CutObjective,
}

/// Exact objective value of a proper, nonempty subset.
pub fn expansion_ratio(g: &Graph, s: &CutIndicator, objective: CutObjective) -> Result<Ratio<u64>> {
    let n = g.num_nodes();
    if s.len() != n {
        return Err(Error::Dimension(format!(
            "indicator has length {}, graph has {n} nodes",
            s.len()
        )));
    }
    let size = s.size();
    if size == 0 || size == n {
        return Err(Error::InvalidCut(format!(
            "subset of size {size} out of {n} nodes; both sides must be nonempty"
        )));
    }
    let cut = g.cut_size_of_indicator(s.bits());
    Ok(objective.ratio(cut, size as u64, n as u64))
}

/// `φ(S) = |E(S, S̄)| / min(|S|, |S̄|)`
pub fn edge_expansion(g: &Graph, s: &CutIndicator) -> Result<f64> {
    expansion_ratio(g, s, CutObjective::Phi).map(ratio_to_f64)
}

/// `φ′(S) = |E(S, S̄)| / (|S| · |S̄|)`
pub fn edge_expansion_prime(g: &Graph, s: &CutIndicator) -> Result<f64> {
    expansion_ratio(g, s, CutObjective::PhiPrime).map(ratio_to_f64)
}

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    r.to_f64().expect("u64 ratios convert to f64")
}

/// Exhaustive sparsest cut over every proper nonempty subset.
///
/// Node 0 is pinned into `S` (both objectives are complement-symmetric), so
/// `2^(n-1) - 1` subsets are scored. Ties on the exact value go to the
/// lexicographically smallest indicator vector.
pub fn brute_force_sparsest_cut(g: &Graph, objective: CutObjective) -> Result<CutResult> {
    let n = g.num_nodes();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n < 2 {
        return Err(Error::InvalidCut(format!(
            "a graph with {n} nodes has no proper nonempty subset"
        )));
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let free = n - 1;
    // `rest` enumerates membership of nodes 1..n; the all-ones pattern would
    // put every node in S and is excluded.
    let (ratio, _, mask) = (0u32..(1u32 << free) - 1)
        .into_par_iter()
        .map(|rest| {
            let mask = 1 | (rest << 1);
            let cut = edges
                .iter()
                .filter(|&&(u, v)| (mask >> u ^ mask >> v) & 1 == 1)
                .count() as u64;
            let size = u64::from(mask.count_ones());
            // Bit 0 becomes the most significant: integer order on `key`
            // is lexicographic order on the indicator vector.
            let key = mask.reverse_bits() >> (32 - n);
            (objective.ratio(cut, size, n as u64), key, mask)
        })
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
        .expect("at least one subset when n >= 2");

    Ok(CutResult {
        best_set: CutIndicator::from_mask(n, mask),
        value: ratio_to_f64(ratio),
        ratio,
        objective,
    })
}

/// `Tr(Zᵀ L_K Z) = Σ_{i<j} ‖z_i - z_j‖²` in `O(nd)`.
///
/// Uses `n Σ‖y_i‖² - ‖Σ y_i‖²` on rows shifted by `z_0`; pairwise distances
/// are translation invariant and the shift limits cancellation.
pub fn full_pair_distance_sum<T: Scalar>(z: &DenseMatrix<T>) -> T {
    let n = z.rows();
    if n <= 1 {
        return T::zero();
    }
    let origin = z.row(0);
    let mut sum = vec![T::zero(); z.cols()];
    let mut sq = T::zero();
    for i in 0..n {
        for ((acc, &x), &o) in sum.iter_mut().zip(z.row(i)).zip(origin) {
            let y = x - o;
            *acc += y;
            sq += y * y;
        }
    }
    let norm_of_sum: T = sum.iter().map(|&s| s * s).sum();
    (T::of(n as f64) * sq - norm_of_sum).max(T::zero())
}

/// Result of [`sparsification_check`].
#[derive(Clone, Debug)]
pub struct SparsificationReport<T> {
    /// Exact all-pairs sum the estimates are compared against.
    pub exact: T,
    /// Per trial: `(Σ_{sampled} ‖z_i - z_j‖²) / p`.
    pub estimates: Vec<T>,
    /// Per trial: number of pairs sampled.
    pub sampled_pairs: Vec<usize>,
    pub relative_errors: Vec<T>,
    pub mean_relative_error: T,
    pub max_relative_error: T,
}

/// Samples each unordered pair independently with probability `p` and
/// compares the rescaled sampled sum with the exact all-pairs sum.
pub fn sparsification_check<T: Scalar>(
    z: &DenseMatrix<T>,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<SparsificationReport<T>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!(
            "sampling probability {p} is not in (0, 1]"
        )));
    }
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let exact = full_pair_distance_sum(z);
    if exact <= T::zero() {
        return Err(Error::DegenerateInput(
            "all rows coincide; the all-pairs distance sum is zero".into(),
        ));
    }
    let n = z.rows();
    let total_pairs = n * (n - 1) / 2;
    let inv_p = T::of(1.0 / p);
    let mut rng = stream(seed, Purpose::Sparsification);

    let mut estimates = Vec::with_capacity(trials);
    let mut sampled_pairs = Vec::with_capacity(trials);
    let mut relative_errors = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut sum = T::zero();
        let mut count = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    sum += squared_distance(z.row(i), z.row(j));
                    count += 1;
                }
            }
        }
        // With every pair drawn the estimator is the all-pairs sum itself.
        let estimate = if count == total_pairs && p == 1.0 {
            exact
        } else {
            sum * inv_p
        };
        estimates.push(estimate);
        sampled_pairs.push(count);
        relative_errors.push((estimate - exact).abs() / exact);
    }
    let mean_relative_error = relative_errors.iter().copied().sum::<T>() / T::of(trials as f64);
    let max_relative_error = relative_errors.iter().copied().fold(T::zero(), T::max);
    Ok(SparsificationReport {
        exact,
        estimates,
        sampled_pairs,
        relative_errors,
        mean_relative_error,
        max_relative_error,
    })
}
