use gencorr::moments::{build_moment_cache, joint_cumulant_hat, DEFAULT_VAR_TOLERANCE};
use gencorr::screen::{interaction_ranks, screen_interactions_cached, InteractionOptions};
use gencorr::{rank_of, screen_marginal, Dataset, NormSpec};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    proptest::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (8usize..30, 1usize..6, 1usize..4).prop_flat_map(|(n, p, q)| {
        (matrix(n, p), matrix(n, q)).prop_map(|(x, y)| Dataset::new(x, y).unwrap())
    })
}

fn scale() -> impl Strategy<Value = f64> {
    prop_oneof![-50.0f64..-0.05, 0.05f64..50.0]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulant_shift_invariant_and_linear_in_scale(
        y in proptest::collection::vec(-5.0f64..5.0, 12),
        x1 in proptest::collection::vec(-5.0f64..5.0, 12),
        x2 in proptest::collection::vec(-5.0f64..5.0, 12),
        a in scale(), b in -100.0f64..100.0,
    ) {
        let (y, x1, x2) = (Array1::from(y), Array1::from(x1), Array1::from(x2));
        let base = joint_cumulant_hat(y.view(), &[x1.view(), x2.view()]).unwrap();
        let moved = x1.mapv(|v| a * v + b);
        let k = joint_cumulant_hat(y.view(), &[moved.view(), x2.view()]).unwrap();
        prop_assert!((k - a * base).abs() <= 1e-9 * (1.0 + (a * base).abs()));
    }

    #[test]
    fn marginal_utilities_affine_invariant(data in dataset(), a in scale(), b in -100.0f64..100.0, c in scale(), d in -100.0f64..100.0) {
        let before = screen_marginal(&data, NormSpec::FROBENIUS);
        prop_assume!(before.is_ok());
        let before = before.unwrap();
        let mut x = data.x().clone();
        x.column_mut(0).mapv_inplace(|v| a * v + b);
        let mut y = data.y().clone();
        y.column_mut(0).mapv_inplace(|v| c * v + d);
        let after = screen_marginal(&Dataset::new(x, y).unwrap(), NormSpec::FROBENIUS).unwrap();
        for s in before.scores() {
            prop_assert!(rel(after.value_of(&s.indices).unwrap(), s.value) <= 1e-9);
        }
    }

    #[test]
    fn row_permutation_invariant(data in dataset(), shift in 1usize..7) {
        let before = screen_marginal(&data, NormSpec::TAXICAB);
        prop_assume!(before.is_ok());
        let before = before.unwrap();
        let n = data.n();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).rev().collect();
        let x = data.x().select(ndarray::Axis(0), &perm);
        let y = data.y().select(ndarray::Axis(0), &perm);
        let after = screen_marginal(&Dataset::new(x, y).unwrap(), NormSpec::TAXICAB).unwrap();
        for s in before.scores() {
            prop_assert!(rel(after.value_of(&s.indices).unwrap(), s.value) <= 1e-10);
        }
    }

    #[test]
    fn taxicab_dominates_and_frobenius_respects_null_floor(data in dataset()) {
        let cache = build_moment_cache(&data, DEFAULT_VAR_TOLERANCE);
        prop_assume!(cache.is_ok());
        let floor = cache.unwrap().gamma_hat().sqrt();
        let t = screen_marginal(&data, NormSpec::TAXICAB).unwrap();
        let f = screen_marginal(&data, NormSpec::FROBENIUS).unwrap();
        for s in f.scores() {
            prop_assert!(s.value >= floor * (1.0 - 1e-12));
            prop_assert!(t.value_of(&s.indices).unwrap() >= s.value * (1.0 - 1e-12));
        }
    }

    #[test]
    fn pair_utilities_affine_invariant(
        x in matrix(15, 5), y in matrix(15, 2), a in scale(), b in -20.0f64..20.0,
    ) {
        let data = Dataset::new(x, y).unwrap();
        let cache = build_moment_cache(&data, DEFAULT_VAR_TOLERANCE);
        prop_assume!(cache.is_ok());
        let before = screen_interactions_cached(&cache.unwrap(), 2, NormSpec::FROBENIUS, InteractionOptions::top_k(100)).unwrap();
        let mut x2 = data.x().clone();
        x2.column_mut(2).mapv_inplace(|v| a * v + b);
        let moved = Dataset::new(x2, data.y().clone()).unwrap();
        let cache2 = build_moment_cache(&moved, DEFAULT_VAR_TOLERANCE).unwrap();
        let after = screen_interactions_cached(&cache2, 2, NormSpec::FROBENIUS, InteractionOptions::top_k(100)).unwrap();
        for s in before.scores() {
            prop_assert!(rel(after.value_of(&s.indices).unwrap(), s.value) <= 1e-9);
        }
    }

    #[test]
    fn counted_ranks_match_report_ranks(x in matrix(12, 7), y in matrix(12, 3)) {
        let data = Dataset::new(x, y).unwrap();
        let cache = build_moment_cache(&data, DEFAULT_VAR_TOLERANCE);
        prop_assume!(cache.is_ok());
        let cache = cache.unwrap();
        let targets = vec![vec![0, 1], vec![2, 5], vec![3, 6]];
        let norms = [NormSpec::TAXICAB, NormSpec::FROBENIUS];
        let counted = interaction_ranks(&cache, 2, &norms, &targets).unwrap();
        for (k, norm) in norms.iter().enumerate() {
            let full = screen_interactions_cached(&cache, 2, *norm, InteractionOptions::top_k(1000)).unwrap();
            for (t, target) in targets.iter().enumerate() {
                prop_assert_eq!(counted[k][t] as usize, rank_of(&full, target).unwrap());
            }
        }
    }
}
