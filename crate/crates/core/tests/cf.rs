mod common;

use adaptive_cf::cf::{
    auto_latent_factors, auto_latent_factors_monitored, latent_from_qb, mae, predict_rating,
    AutoLatentConfig, LatentFactors, Predictor, RatingSample,
};
use adaptive_cf::linalg::{DenseMat, SparseRatings};
use adaptive_cf::rsvd::{adaptive_pca_with_state, AdaptiveQb, FixedPrecisionQb, TerminationCriterion};
use adaptive_cf::Error;
use common::*;
use rand::Rng;

fn factors(rows: &[Vec<f64>]) -> LatentFactors {
    LatentFactors::new(DenseMat::from_rows(rows).unwrap()).unwrap()
}

#[test]
fn toy_prediction_matches_brute_force() {
    let a = SparseRatings::from_triplets(
        4,
        4,
        &[(0, 0, 5.0), (0, 1, 3.0), (1, 1, 4.0), (1, 2, 1.0), (2, 0, 2.0), (2, 3, 5.0), (3, 2, 4.0)],
        (1.0, 5.0),
    )
    .unwrap();
    let t = vec![vec![1.0, 0.5, -0.3, 2.0], vec![0.2, 1.0, 0.9, -0.4]];
    let f = factors(&t);
    let known = grid(&a);
    for i in 0..4 {
        for j in 0..4 {
            let p = predict_rating(&a, &f, i, j).unwrap();
            match brute_force_prediction(&known, &t, i, j) {
                Some(raw) => assert!((p.raw.unwrap() - raw).abs() <= 1e-12),
                None => assert!(p.fallback),
            }
        }
    }
}

#[test]
fn single_rated_item_with_identical_factor() {
    let a = SparseRatings::from_triplets(2, 3, &[(0, 1, 4.0), (1, 0, 2.0)], (1.0, 5.0)).unwrap();
    let f = factors(&[vec![1.0, 2.0, 2.0], vec![0.5, -1.0, -1.0]]);
    let p = predict_rating(&a, &f, 0, 2).unwrap();
    assert!(!p.fallback);
    assert!((p.value - 4.0).abs() < 1e-12);
}

#[test]
fn orthogonal_items_fall_back_to_user_mean() {
    let a = SparseRatings::from_triplets(2, 3, &[(0, 0, 4.0), (0, 1, 2.0), (1, 2, 5.0)], (1.0, 5.0)).unwrap();
    let f = factors(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    let p = predict_rating(&a, &f, 0, 2).unwrap();
    assert!(p.fallback && p.raw.is_none());
    assert_eq!(p.value, 3.0);
}

#[test]
fn cold_user_and_zero_item_fall_back_to_global_mean() {
    let a = SparseRatings::from_triplets(3, 2, &[(0, 0, 4.0), (1, 1, 2.0)], (1.0, 5.0)).unwrap();
    let f = factors(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
    let p = predict_rating(&a, &f, 2, 0).unwrap();
    assert!(p.fallback);
    assert_eq!(p.value, 3.0);
    // item 1 has a zero latent column
    let p = predict_rating(&a, &f, 0, 1).unwrap();
    assert!(p.fallback);
    assert_eq!(p.value, 4.0);
}

#[test]
fn prediction_errors() {
    let a = SparseRatings::from_triplets(2, 2, &[(0, 0, 4.0)], (1.0, 5.0)).unwrap();
    let f = factors(&[vec![1.0, 1.0]]);
    assert!(matches!(predict_rating(&a, &f, 2, 0), Err(Error::IndexOutOfBounds { .. })));
    let wrong = factors(&[vec![1.0, 1.0, 1.0]]);
    assert!(predict_rating(&a, &wrong, 0, 1).is_err());
}

#[test]
fn negative_weights_are_kept_and_output_is_clamped() {
    let a = SparseRatings::from_triplets(1, 3, &[(0, 0, 5.0), (0, 1, 1.0)], (1.0, 5.0)).unwrap();
    // cosines +0.6 and -0.5: (3 - 0.5) / 0.1 = 25 before clamping
    let f = factors(&[vec![0.6, -0.5, 1.0], vec![0.8, 0.8660254037844386, 0.0]]);
    let p = predict_rating(&a, &f, 0, 2).unwrap();
    let raw = p.raw.unwrap();
    assert!((raw - 25.0).abs() < 1e-9);
    assert_eq!(p.value, 5.0);
}

#[test]
fn random_predictions_match_brute_force_and_stay_in_range() {
    let mut g = rng(77);
    for case in 0..50 {
        let (m, n, k) = (g.random_range(2..12), g.random_range(2..12), g.random_range(1..5));
        let a = random_ratings(m, n, 0.4, case);
        let t: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| normal(&mut g)).collect()).collect();
        let f = factors(&t);
        let known = grid(&a);
        let (lo, hi) = a.rating_range();
        for _ in 0..10 {
            let (i, j) = (g.random_range(0..m), g.random_range(0..n));
            let p = predict_rating(&a, &f, i, j).unwrap();
            assert!(p.value >= lo && p.value <= hi);
            match brute_force_prediction(&known, &t, i, j) {
                Some(raw) => assert!((p.raw.unwrap() - raw).abs() <= 1e-12 * raw.abs().max(1.0)),
                None => assert!(p.fallback),
            }
        }
    }
}

#[test]
fn prediction_is_invariant_to_common_scaling() {
    let a = random_ratings(15, 20, 0.3, 4);
    let base = random_dense(3, 20, 5);
    let mut scaled = base.clone();
    scaled.as_mut_slice().iter_mut().for_each(|v| *v *= 37.5);
    let (f, g) = (LatentFactors::new(base).unwrap(), LatentFactors::new(scaled).unwrap());
    for i in 0..15 {
        for j in 0..20 {
            let (x, y) = (predict_rating(&a, &f, i, j).unwrap(), predict_rating(&a, &g, i, j).unwrap());
            assert_eq!(x.fallback, y.fallback);
            assert!((x.value - y.value).abs() <= 1e-12);
        }
    }
}

#[test]
fn mae_examples() {
    assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(mae(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 1.5);
    assert!(mae(&[], &[]).is_err());
    assert!(mae(&[1.0], &[1.0, 2.0]).is_err());
    let mut g = rng(3);
    let p: Vec<f64> = (0..500).map(|_| normal(&mut g)).collect();
    let t: Vec<f64> = (0..500).map(|_| normal(&mut g)).collect();
    let mut total = 0.0;
    for idx in 0..500 {
        total += (p[idx] - t[idx]).abs();
    }
    assert!((mae(&p, &t).unwrap() - total / 500.0).abs() <= 1e-14);
}

/// `Tᵀ·diag(‖T(r,:)‖²)·T` equals `(QB)ᵀ(QB)`, because `T = Σ^½Vᵀ`.
fn assert_latent_identity(state: &adaptive_cf::rsvd::QbState, f: &LatentFactors) {
    let t = f.t();
    let weights: Vec<f64> = (0..t.rows())
        .map(|r| (0..t.cols()).map(|j| t.get(r, j).powi(2)).sum())
        .collect();
    let mut weighted = t.transpose();
    weighted.scale_columns(&weights);
    let lhs = weighted.matmul(t).unwrap();
    let p = state.product();
    let rhs = p.tr_matmul(&p).unwrap();
    assert!(fro_diff(&lhs, &rhs) <= 1e-8 * rhs.fro_norm());
    // row norms are the singular values' square roots, non-increasing
    assert!(weights.windows(2).all(|w| w[0] >= w[1] - 1e-12 * w[0]));
}

#[test]
fn latent_factors_reconstruct_gram_matrix() {
    for (m, n) in [(30, 40), (40, 30)] {
        let a = low_rank(m, n, 2, 9);
        let mut qb = AdaptiveQb::new(&a, 2, 4, 1).unwrap();
        let state = qb.step().unwrap();
        let f = latent_from_qb(state).unwrap();
        assert_eq!((f.k(), f.items()), (2, n));
        assert_latent_identity(state, &f);

        let b = random_ratings(m, n, 0.2, 3);
        let mut qb = AdaptiveQb::new(&b, 4, 5, 1).unwrap();
        qb.step().unwrap();
        let state = qb.step().unwrap();
        let f = latent_from_qb(state).unwrap();
        assert_eq!(f.k(), 8);
        assert_latent_identity(state, &f);
    }
}

#[test]
fn latent_factors_of_identity_block() {
    let a = SparseRatings::from_triplets(2, 5, &[(0, 0, 1.0), (1, 1, 1.0)], (0.0, 1.0)).unwrap();
    let mut qb = FixedPrecisionQb::new(&a, 2, 0, 0).unwrap();
    let f = latent_from_qb(qb.step().unwrap()).unwrap();
    assert_eq!(f.k(), 2);
    assert!((f.col_norms()[0] - 1.0).abs() < 1e-12 && (f.col_norms()[1] - 1.0).abs() < 1e-12);
    assert!(f.col_norms()[2..].iter().all(|&x| x < 1e-12));
}

#[test]
fn col_norms_are_cached_exactly() {
    let t = random_dense(5, 30, 1);
    let f = LatentFactors::new(t.clone()).unwrap();
    for j in 0..30 {
        let want = t.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((f.col_norms()[j] - want).abs() <= 1e-12 * want);
    }
}

fn scan(a: &SparseRatings, validation: &[RatingSample], b: usize, q: usize, seed: u64, max_rank: usize) -> Vec<(usize, f64)> {
    let predictor = Predictor::new(a);
    let mut qb = AdaptiveQb::new(a, b, q, seed).unwrap();
    let mut out = Vec::new();
    while qb.can_step() && qb.state().rank() < max_rank {
        let f = latent_from_qb(qb.step().unwrap()).unwrap();
        out.push((f.k(), predictor.mae(&f, validation).unwrap()));
    }
    out
}

#[test]
fn auto_latent_finds_model_rank() {
    let r = 6;
    let b = 2;
    for seed in 0..3 {
        let (a, validation, _) = rank_model_ratings(120, 90, r, 0.5, seed);
        let config = AutoLatentConfig {
            block_size: b,
            seed,
            ..AutoLatentConfig::default()
        };
        let result = auto_latent_factors(&a, &validation, &config).unwrap();
        assert!((r..=r + 2 * b).contains(&result.k()), "seed {seed}: k = {}", result.k());
        let full = scan(&a, &validation, b, config.passes, seed, 40);
        assert!(result.validation_mae <= full[0].1);
        let global = full.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        assert!((result.validation_mae - global).abs() <= 1e-12, "seed {seed}");
    }
}

#[test]
fn mae_trace_matches_recomputation() {
    let (a, validation, test) = rank_model_ratings(80, 70, 5, 0.5, 11);
    let config = AutoLatentConfig {
        block_size: 3,
        passes: 5,
        patience: 3,
        seed: 4,
        ..AutoLatentConfig::default()
    };
    let result = auto_latent_factors_monitored(&a, &validation, &test, &config).unwrap();
    let replay = scan(&a, &validation, 3, 5, 4, result.trace.last().unwrap().k);
    assert_eq!(replay.len(), result.trace.len());
    let predictor = Predictor::new(&a);
    let mut qb = AdaptiveQb::new(&a, 3, 5, 4).unwrap();
    for (point, (k, mae)) in result.trace.iter().zip(&replay) {
        assert_eq!(point.k, *k);
        assert!((point.validation_mae - mae).abs() <= 1e-12);
        let f = latent_from_qb(qb.step().unwrap()).unwrap();
        assert!((point.monitor_mae.unwrap() - predictor.mae(&f, &test).unwrap()).abs() <= 1e-12);
    }
    assert!(result.trace.windows(2).all(|w| w[1].k == w[0].k + 3 && w[1].seconds >= w[0].seconds));
    assert_eq!(result.passes, 5 * result.trace.len());
}

#[test]
fn validation_criterion_in_adaptive_pca() {
    let (a, validation, _) = rank_model_ratings(120, 90, 6, 0.5, 2);
    let (svd, state) = adaptive_pca_with_state(
        &a,
        2,
        10,
        TerminationCriterion::ValidationMae {
            validation: &validation,
            patience: 2,
            min_improvement: 1e-4,
        },
        2,
    )
    .unwrap();
    let config = AutoLatentConfig {
        block_size: 2,
        seed: 2,
        ..AutoLatentConfig::default()
    };
    let auto = auto_latent_factors(&a, &validation, &config).unwrap();
    assert_eq!(svd.rank(), auto.k());
    assert_eq!(state.rank(), auto.k());
}

#[test]
fn auto_latent_preconditions() {
    let (a, validation, _) = rank_model_ratings(20, 20, 2, 0.5, 0);
    let bad_passes = AutoLatentConfig {
        passes: 2,
        ..AutoLatentConfig::default()
    };
    assert!(auto_latent_factors(&a, &validation, &bad_passes).is_err());
    assert!(auto_latent_factors(&a, &[], &AutoLatentConfig::default()).is_err());
    // block larger than the matrix: nothing can be evaluated
    let config = AutoLatentConfig {
        block_size: 25,
        ..AutoLatentConfig::default()
    };
    assert!(matches!(auto_latent_factors(&a, &validation, &config), Err(Error::Exhausted { .. })));
}
