//! Laplacian smoothing with the random-walk filter `D̃⁻¹Ã`, where
//! `Ã = A + I` and `D̃ = D + I`.
//!
//! Each application replaces a node's row by the mean of its own row and its
//! neighbors' rows. Smoothing is a fixed pre-processing step; it is computed
//! once and never differentiated through.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// `k`-fold application of `D̃⁻¹Ã` over a borrowed graph.
#[derive(Clone, Debug)]
pub struct SmoothingOperator<'g, T> {
    graph: &'g Graph,
    /// `d_i + 1`, the row sums of `Ã`.
    loop_degrees: Vec<T>,
    k: usize,
}

impl<'g, T: Scalar> SmoothingOperator<'g, T> {
    pub fn new(graph: &'g Graph, k: usize) -> Self {
        let loop_degrees = graph
            .degrees()
            .into_iter()
            .map(|d| T::of((d + 1) as f64))
            .collect();
        Self {
            graph,
            loop_degrees,
            k,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// `1 / (d_i + 1)` per node.
    pub fn inv_degrees(&self) -> Vec<T> {
        self.loop_degrees.iter().map(|&d| d.recip()).collect()
    }

    /// `F^(k) = (D̃⁻¹Ã)^k F`; `k = 0` returns a copy of `F`.
    pub fn smooth(&self, features: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.check_rows(features)?;
        let mut current = features.clone();
        for _ in 0..self.k {
            current = self.step(&current);
        }
        Ok(current)
    }

    /// Every level `[F^(1), …, F^(k)]`, each reusing the previous one.
    pub fn smooth_all_scales(&self, features: &DenseMatrix<T>) -> Result<Vec<DenseMatrix<T>>> {
        self.check_rows(features)?;
        if self.k == 0 {
            return Err(Error::Config(
                "multi-scale smoothing needs at least one level".into(),
            ));
        }
        let mut levels: Vec<DenseMatrix<T>> = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            let next = self.step(levels.last().unwrap_or(features));
            levels.push(next);
        }
        Ok(levels)
    }

    /// One application of `D̃⁻¹Ã`.
    ///
    /// Rows are summed in ascending node order (the node itself included at
    /// its sorted position) and then divided by `d_i + 1`, so the result does
    /// not depend on how rows are scheduled across threads.
    fn step(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        let cols = x.cols();
        let mut out = DenseMatrix::zeros(x.rows(), cols);
        if cols == 0 {
            return out;
        }
        out.data_mut()
            .par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, row)| {
                let neighbors = self.graph.neighbors(i);
                let split = neighbors.partition_point(|&j| j < i);
                let ordered = neighbors[..split]
                    .iter()
                    .chain(std::iter::once(&i))
                    .chain(&neighbors[split..]);
                for &j in ordered {
                    for (acc, &v) in row.iter_mut().zip(x.row(j)) {
                        *acc += v;
                    }
                }
                let d = self.loop_degrees[i];
                for acc in row.iter_mut() {
                    *acc /= d;
                }
            });
        out
    }

    fn check_rows(&self, features: &DenseMatrix<T>) -> Result<()> {
        if features.rows() != self.graph.num_nodes() {
            return Err(Error::Dimension(format!(
                "feature matrix has {} rows, graph has {} nodes",
                features.rows(),
                self.graph.num_nodes()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap().0
    }

    fn column(values: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    fn close(a: &DenseMatrix<f64>, expected: &[f64]) {
        for (x, y) in a.data().iter().zip(expected) {
            assert!((x - y).abs() < 1e-15, "{:?} vs {expected:?}", a.data());
        }
    }

    #[test]
    fn path_one_step() {
        let g = path3();
        let out = SmoothingOperator::new(&g, 1)
            .smooth(&column(&[1.0, 0.0, 0.0]))
            .unwrap();
        close(&out, &[1.0 / 2.0, 1.0 / 3.0, 0.0]);
    }

    #[test]
    fn path_all_scales() {
        let g = path3();
        let op = SmoothingOperator::new(&g, 2);
        let f = column(&[1.0, 0.0, 0.0]);
        let levels = op.smooth_all_scales(&f).unwrap();
        assert_eq!(levels.len(), 2);
        close(&levels[0], &[1.0 / 2.0, 1.0 / 3.0, 0.0]);
        close(&levels[1], &[5.0 / 12.0, 5.0 / 18.0, 1.0 / 6.0]);
        assert_eq!(levels[1], op.smooth(&f).unwrap());

        let single = SmoothingOperator::new(&g, 1);
        assert_eq!(
            single.smooth_all_scales(&f).unwrap(),
            vec![single.smooth(&f).unwrap()]
        );
    }

    #[test]
    fn zero_depth_and_edgeless_graphs_are_identity() {
        let g = path3();
        let f = DenseMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 - 1.5);
        assert_eq!(SmoothingOperator::new(&g, 0).smooth(&f).unwrap(), f);
        let empty = Graph::from_edges(3, &[]).unwrap().0;
        assert_eq!(SmoothingOperator::new(&empty, 5).smooth(&f).unwrap(), f);
    }

    #[test]
    fn constants_and_ones_are_fixed_points() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (1, 3)])
            .unwrap()
            .0;
        let ones = DenseMatrix::filled(5, 1, 1.0);
        assert_eq!(SmoothingOperator::new(&g, 1).smooth(&ones).unwrap(), ones);
        let c = DenseMatrix::filled(5, 3, -2.5);
        assert_eq!(SmoothingOperator::new(&g, 4).smooth(&c).unwrap(), c);
    }

    #[test]
    fn inverse_degrees() {
        let g = path3();
        let op = SmoothingOperator::<f64>::new(&g, 1);
        assert_eq!(op.inv_degrees(), vec![0.5, 1.0 / 3.0, 0.5]);
    }

    #[test]
    fn row_mismatch_and_zero_levels() {
        let g = path3();
        let op = SmoothingOperator::new(&g, 1);
        assert!(matches!(
            op.smooth(&column(&[1.0, 2.0])),
            Err(Error::Dimension(_))
        ));
        let op0 = SmoothingOperator::<f64>::new(&g, 0);
        assert!(op0.smooth_all_scales(&column(&[1.0, 2.0, 3.0])).is_err());
    }
}
