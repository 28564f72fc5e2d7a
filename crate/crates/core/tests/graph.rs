mod common;

use common::*;
use proptest::prelude::*;
use sce_core::{load_edge_list, write_edge_list, DenseMatrix, Graph};

fn dense_laplacian(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let a = dense_adjacency(n, edges);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        let deg: f64 = a[i].iter().sum();
        for j in 0..n {
            l[i][j] = if i == j { deg } else { -a[i][j] };
        }
    }
    l
}

#[test]
fn quadratic_form_matches_dense_laplacian() {
    for seed in 0..20 {
        let n = 5 + seed as usize * 2;
        let edges = random_edges(n, 0.3, seed);
        let g = Graph::from_edges(n, &edges).unwrap().0;
        let l = dense_laplacian(n, &edges);
        let x = gaussian(n, 3, 100 + seed);
        let lx = dense_matmul(&l, &to_rows(&x));
        let mut expect = 0.0;
        for i in 0..n {
            for c in 0..3 {
                expect += x[(i, c)] * lx[i][c];
            }
        }
        let got = g.laplacian_quadratic_matrix(&x).unwrap();
        assert!(
            (got - expect).abs() <= 1e-12 * expect.abs().max(1.0),
            "{got} vs {expect}"
        );

        // Per column, via the vector form.
        let by_column: f64 = (0..3)
            .map(|c| g.laplacian_quadratic(&x.column(c)).unwrap())
            .sum();
        assert!((by_column - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }
}

#[test]
fn laplacian_columns_sum_to_zero() {
    let g = random_graph(30, 0.2, 7);
    let ones = vec![1.0f64; 30];
    assert_eq!(g.laplacian_quadratic(&ones).unwrap(), 0.0);
    let l = dense_laplacian(30, &g.edges().collect::<Vec<_>>());
    for j in 0..30 {
        let col: f64 = l.iter().map(|row| row[j]).sum();
        assert_eq!(col, 0.0);
    }
}

fn build((n, edges): (usize, Vec<(usize, usize)>)) -> Graph {
    Graph::from_edges(n, &edges).unwrap().0
}

proptest! {
    #[test]
    fn adjacency_is_symmetric_sorted_and_loop_free(input in arb_graph(1, 25)) {
        let g = build(input);
        let mut total = 0;
        for u in 0..g.num_nodes() {
            let nb = g.neighbors(u);
            prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!nb.contains(&u));
            for &v in nb {
                prop_assert!(g.has_edge(v, u));
            }
            total += nb.len();
        }
        prop_assert_eq!(total, 2 * g.num_edges());
    }

    #[test]
    fn cut_size_is_quadratic_form_of_indicator(input in arb_graph(2, 25), mask in any::<u32>()) {
        let g = build(input);
        let n = g.num_nodes();
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let x: Vec<f64> = (0..n).map(|i| f64::from(mask >> i & 1)).collect();
        let cut = g.cut_size(&subset).unwrap();
        prop_assert_eq!(cut as f64, g.laplacian_quadratic(&x).unwrap());
        let complement: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        prop_assert_eq!(cut, g.cut_size(&complement).unwrap());
    }

    #[test]
    fn quadratic_form_is_translation_invariant(input in arb_graph(2, 20), shift in -50.0f64..50.0) {
        let g = build(input);
        let n = g.num_nodes();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let a = g.laplacian_quadratic(&x).unwrap();
        let b = g.laplacian_quadratic(&shifted).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn edge_list_order_does_not_matter(input in arb_graph(1, 20), rot in 0usize..50, flip in any::<bool>()) {
        let (n, edges) = input;
        let mut permuted = edges.clone();
        if !permuted.is_empty() {
            let r = rot % permuted.len();
            permuted.rotate_left(r);
        }
        if flip {
            permuted.iter_mut().for_each(|e| *e = (e.1, e.0));
        }
        let a = Graph::from_edges(n, &edges).unwrap().0;
        let b = Graph::from_edges(n, &permuted).unwrap().0;
        prop_assert_eq!(&a, &b);

        let mut text = Vec::new();
        write_edge_list(&a, &mut text).unwrap();
        let back = load_edge_list(text.as_slice()).unwrap();
        prop_assert_eq!(back.graph, a);
    }
}

#[test]
fn quadratic_matrix_form_rejects_wrong_rows() {
    let g = random_graph(5, 0.5, 1);
    assert!(g
        .laplacian_quadratic_matrix(&DenseMatrix::<f64>::zeros(4, 2))
        .is_err());
    assert!(g.laplacian_quadratic(&[0.0f64; 6]).is_err());
}
