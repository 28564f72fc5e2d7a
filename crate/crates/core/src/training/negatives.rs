use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Fixed list of sampled node pairs `(i, j)`, `i ≠ j`.
///
/// Read as the edge set of a graph `H` on the same nodes, the pairs define the
/// Laplacian whose quadratic form is the training objective's denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativePairSet {
    pairs: Vec<(usize, usize)>,
}

impl NegativePairSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(i, _)) = pairs.iter().find(|(i, j)| i == j) {
            return Err(Error::Data(format!(
                "self-pair ({i}, {i}) is not a negative sample"
            )));
        }
        Ok(Self { pairs })
    }

    /// Every unordered pair `i < j` of `n` nodes.
    pub fn all_pairs(n: usize) -> Self {
        Self {
            pairs: (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Fails if any index is `>= n`.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self
            .pairs
            .iter()
            .flat_map(|&(i, j)| [i, j])
            .find(|&x| x >= n)
        {
            Some(index) => Err(Error::Index { index, n }),
            None => Ok(()),
        }
    }
}

/// Draws `per_node` partners for every node, uniformly from the other
/// `n - 1` nodes and with replacement. Graph edges are not excluded.
pub fn sample_negatives(n: usize, per_node: usize, seed: u64) -> Result<NegativePairSet> {
    sample_negatives_with(n, per_node, &mut stream(seed, Purpose::Negatives))
}

pub(crate) fn sample_negatives_with<R: Rng>(
    n: usize,
    per_node: usize,
    rng: &mut R,
) -> Result<NegativePairSet> {
    if n < 2 {
        return Err(Error::Config(format!(
            "negative sampling needs at least two nodes, got {n}"
        )));
    }
    let mut pairs = Vec::with_capacity(n * per_node);
    for i in 0..n {
        for _ in 0..per_node {
            let r = rng.random_range(0..n - 1);
            pairs.push((i, if r < i { r } else { r + 1 }));
        }
    }
    Ok(NegativePairSet { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_no_self_pairs() {
        let neg = sample_negatives(10, 5, 1).unwrap();
        assert_eq!(neg.len(), 50);
        assert!(neg.pairs().iter().all(|&(i, j)| i != j && i < 10 && j < 10));
        for i in 0..10 {
            assert_eq!(neg.pairs().iter().filter(|p| p.0 == i).count(), 5);
        }
    }

    #[test]
    fn two_nodes_only_pair_each_other() {
        let neg = sample_negatives(2, 1, 4).unwrap();
        assert_eq!(neg.pairs(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            sample_negatives(30, 3, 7).unwrap(),
            sample_negatives(30, 3, 7).unwrap()
        );
        assert_ne!(
            sample_negatives(30, 3, 7).unwrap(),
            sample_negatives(30, 3, 8).unwrap()
        );
    }

    #[test]
    fn partners_cover_every_other_node() {
        let neg = sample_negatives(4, 200, 0).unwrap();
        for i in 0..4 {
            for j in (0..4).filter(|&j| j != i) {
                assert!(neg.pairs().contains(&(i, j)));
            }
        }
    }

    #[test]
    fn rejects_tiny_graphs_and_self_pairs() {
        assert!(sample_negatives(1, 5, 0).is_err());
        assert!(NegativePairSet::new(vec![(0, 1), (2, 2)]).is_err());
        assert!(NegativePairSet::new(vec![(0, 3)])
            .unwrap()
            .check_bounds(3)
            .is_err());
    }
}
