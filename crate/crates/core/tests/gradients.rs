mod common;

use common::*;
use proptest::prelude::*;
use sce_core::training::{
    evaluate, evaluate_loss, negative_distance_loss, pair_distance_sum, sample_negatives, sce_loss,
    LossKind, NegativePairSet, Objective,
};
use sce_core::{embed, forward, Aggregator, DenseMatrix, ModelParams};

fn central_difference_check(agg: Aggregator, kind: LossKind, seed: u64) {
    let (n, f) = (20, 6);
    let levels: u64 = match agg {
        Aggregator::None => 1,
        _ => 3,
    };
    let inputs: Vec<DenseMatrix<f64>> =
        (0..levels).map(|l| gaussian(n, f, seed * 10 + l)).collect();
    let params = ModelParams::<f64>::init(&vec![vec![f, 5, 3]; levels as usize], seed).unwrap();
    let neg = sample_negatives(n, 4, seed).unwrap();
    let objective = Objective {
        alpha: 50.0,
        beta: 0.01,
        kind,
        aggregator: agg,
    };
    let analytic = evaluate(&inputs, &params, &neg, &objective).unwrap().grads;
    let h = 1e-5;
    for s in 0..params.scales.len() {
        for l in 0..params.scales[s].len() {
            for idx in 0..params.scales[s][l].data().len() {
                let mut plus = params.clone();
                plus.scales[s][l].data_mut()[idx] += h;
                let mut minus = params.clone();
                minus.scales[s][l].data_mut()[idx] -= h;
                let fd = (evaluate_loss(&inputs, &plus, &neg, &objective).unwrap()
                    - evaluate_loss(&inputs, &minus, &neg, &objective).unwrap())
                    / (2.0 * h);
                let a = analytic.scales[s][l].data()[idx];
                let err = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
                assert!(
                    err < 1e-5,
                    "{agg:?} {kind:?} scale {s} layer {l} entry {idx}: {a} vs {fd}"
                );
            }
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    for (i, agg) in [
        Aggregator::None,
        Aggregator::Concat,
        Aggregator::Mean,
        Aggregator::Max,
    ]
    .into_iter()
    .enumerate()
    {
        central_difference_check(agg, LossKind::Sce, i as u64);
        central_difference_check(agg, LossKind::NegativeDistance, 10 + i as u64);
    }
}

#[test]
fn all_pairs_sce_is_reciprocal_of_full_pair_sum() {
    for seed in 0..10 {
        let z = gaussian(25, 4, seed);
        let all = NegativePairSet::all_pairs(25);
        let inv = 1.0 / sce_loss(&z, &all).unwrap();
        let exact = sce_core::full_pair_distance_sum(&z);
        assert!((inv - exact).abs() <= 1e-9 * exact);
    }
}

proptest! {
    #[test]
    fn forward_is_linear(x in arb_matrix(6, 4), y in arb_matrix(6, 4), a in -3.0f64..3.0, seed in 0u64..1000) {
        let params = ModelParams::<f64>::init(&[vec![4, 3, 2]], seed).unwrap();
        let stack = &params.scales[0];
        let mut combo = x.scaled(a);
        combo.add_scaled(&y, 1.0).unwrap();
        let mut expect = forward(&x, stack).unwrap().scaled(a);
        expect.add_scaled(&forward(&y, stack).unwrap(), 1.0).unwrap();
        let got = forward(&combo, stack).unwrap();
        prop_assert!(max_abs_diff(got.data(), expect.data()) <= 1e-9);
    }

    #[test]
    fn losses_follow_translation_and_scaling(z in arb_matrix(10, 3), c in 0.1f64..10.0, shift in -20.0f64..20.0, seed in 0u64..1000) {
        let neg = sample_negatives(10, 3, seed).unwrap();
        let s = pair_distance_sum(&z, &neg).unwrap();
        prop_assume!(s > 1e-6);
        let moved = z.map(|v| v + shift);
        let scaled = z.scaled(c);
        let base = sce_loss(&z, &neg).unwrap();
        prop_assert!((sce_loss(&moved, &neg).unwrap() - base).abs() <= 1e-9 * base);
        prop_assert!((sce_loss(&scaled, &neg).unwrap() - base / (c * c)).abs() <= 1e-9 * base / (c * c));
        let neg_base = negative_distance_loss(&z, &neg).unwrap();
        prop_assert!((negative_distance_loss(&scaled, &neg).unwrap() - neg_base * c * c).abs() <= 1e-9 * s * c * c);
    }

    #[test]
    fn mean_and_max_pool_bounds(seed in 0u64..1000) {
        let inputs: Vec<DenseMatrix<f64>> = (0..3).map(|l| gaussian(8, 4, seed + l)).collect();
        let params = ModelParams::<f64>::init(&vec![vec![4, 3]; 3], seed).unwrap();
        let parts: Vec<_> = inputs.iter().zip(&params.scales).map(|(x, s)| forward(x, s).unwrap()).collect();
        let mean = embed(&inputs, &params, Aggregator::Mean).unwrap();
        let max = embed(&inputs, &params, Aggregator::Max).unwrap();
        for idx in 0..mean.data().len() {
            let vals: Vec<f64> = parts.iter().map(|p| p.data()[idx]).collect();
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(max.data()[idx], hi);
            prop_assert!(mean.data()[idx] <= hi + 1e-12);
        }
        prop_assert_eq!(embed(&inputs, &params, Aggregator::Concat).unwrap().cols(), 9);
    }
}

#[test]
fn collapsed_embedding_is_reported() {
    let z = DenseMatrix::<f64>::filled(5, 2, 3.0);
    let neg = sample_negatives(5, 2, 0).unwrap();
    assert!(matches!(
        sce_loss(&z, &neg),
        Err(sce_core::Error::DegenerateEmbedding(_))
    ));
    assert_eq!(negative_distance_loss(&z, &neg).unwrap(), 0.0);
}
