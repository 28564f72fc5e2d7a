mod common;

use common::*;
use proptest::prelude::*;
use sce_core::{DenseMatrix, Graph, SmoothingOperator};

/// `(D̃⁻¹ Ã)^k F` with dense matrices.
fn dense_smooth(
    n: usize,
    edges: &[(usize, usize)],
    f: &DenseMatrix<f64>,
    k: usize,
) -> Vec<Vec<f64>> {
    let mut a = dense_adjacency(n, edges);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
        let d: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= d);
    }
    let mut out = to_rows(f);
    for _ in 0..k {
        out = dense_matmul(&a, &out);
    }
    out
}

#[test]
fn sparse_smoothing_matches_dense_operator() {
    for seed in 0..20u64 {
        let n = 5 + (seed as usize * 7) % 46;
        let k = seed as usize % 5;
        let edges = random_edges(n, 0.15, seed);
        let g = Graph::from_edges(n, &edges).unwrap().0;
        let f = gaussian(n, 4, seed + 1000);
        let op = SmoothingOperator::new(&g, k);
        let got = op.smooth(&f).unwrap();
        let expect: Vec<f64> = dense_smooth(n, &edges, &f, k).concat();
        assert!(max_abs_diff(got.data(), &expect) <= 1e-10);

        if k > 0 {
            let levels = op.smooth_all_scales(&f).unwrap();
            assert_eq!(levels.len(), k);
            for (lvl, m) in levels.iter().enumerate() {
                let expect = dense_smooth(n, &edges, &f, lvl + 1).concat();
                assert!(max_abs_diff(m.data(), &expect) <= 1e-10);
            }
        }
    }
}

proptest! {
    #[test]
    fn constant_rows_are_fixed(input in arb_graph(1, 30), k in 0usize..6, c in -5.0f64..5.0) {
        let (n, edges) = input;
        let g = Graph::from_edges(n, &edges).unwrap().0;
        let f = DenseMatrix::filled(n, 3, c);
        let out = SmoothingOperator::new(&g, k).smooth(&f).unwrap();
        prop_assert!(max_abs_diff(out.data(), f.data()) <= 1e-12);
    }

    #[test]
    fn smoothing_never_expands_max_norm(input in arb_graph(1, 30), k in 0usize..6, seed in any::<u64>()) {
        let (n, edges) = input;
        let g = Graph::from_edges(n, &edges).unwrap().0;
        let f = gaussian(n, 2, seed);
        let out = SmoothingOperator::new(&g, k).smooth(&f).unwrap();
        for c in 0..2 {
            let before = f.column(c).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let after = out.column(c).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(after <= before + 1e-12);
        }
    }

    #[test]
    fn smoothing_is_linear(input in arb_graph(1, 20), k in 0usize..4, a in -3.0f64..3.0) {
        let (n, edges) = input;
        let g = Graph::from_edges(n, &edges).unwrap().0;
        let op = SmoothingOperator::new(&g, k);
        let (x, y) = (gaussian(n, 2, 1), gaussian(n, 2, 2));
        let mut combo = x.scaled(a);
        combo.add_scaled(&y, 1.0).unwrap();
        let mut expect = op.smooth(&x).unwrap().scaled(a);
        expect.add_scaled(&op.smooth(&y).unwrap(), 1.0).unwrap();
        prop_assert!(max_abs_diff(op.smooth(&combo).unwrap().data(), expect.data()) <= 1e-10);
    }
}

#[test]
fn isolated_nodes_keep_their_features() {
    let g = Graph::from_edges(4, &[(0, 1)]).unwrap().0;
    let f = gaussian(4, 3, 9);
    let out = SmoothingOperator::new(&g, 3).smooth(&f).unwrap();
    assert_eq!(out.row(2), f.row(2));
    assert_eq!(out.row(3), f.row(3));
}

#[test]
fn f32_agrees_with_f64() {
    let g = random_graph(40, 0.1, 4);
    let f = gaussian(40, 5, 4);
    let f32m: DenseMatrix<f32> = DenseMatrix::from_fn(40, 5, |i, j| f[(i, j)] as f32);
    let a = SmoothingOperator::new(&g, 3).smooth(&f).unwrap();
    let b = SmoothingOperator::new(&g, 3).smooth(&f32m).unwrap();
    for (x, y) in a.data().iter().zip(b.data()) {
        assert!((x - f64::from(*y)).abs() < 1e-5);
    }
}
