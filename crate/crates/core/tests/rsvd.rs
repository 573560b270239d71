mod common;

use adaptive_cf::linalg::{dense_svd, SparseRatings};
use adaptive_cf::rsvd::{
    adaptive_pca, adaptive_pca_with_state, basic_rsvd, fixed_precision_qb, AdaptiveQb,
    FixedPrecisionQb, QbState, TerminationCriterion,
};
use adaptive_cf::Error;
use common::*;

fn relative_residual(a: &SparseRatings, svd: &adaptive_cf::SvdTriplet) -> f64 {
    svd.residual_fro(a).unwrap() / a.fro_norm_sq().sqrt()
}

/// Residual `‖A − QB‖²_F` computed densely, independent of the library.
fn dense_residual_sq(a: &SparseRatings, state: &QbState) -> f64 {
    fro_diff(&a.to_dense(), &state.product()).powi(2)
}

fn check_block_invariants(a: &SparseRatings, state: &QbState, previous_e: f64) -> f64 {
    let a2 = a.fro_norm_sq();
    let identity = a2 - state.b().fro_norm_sq();
    assert!((identity - dense_residual_sq(a, state)).abs() <= 1e-8 * a2);
    assert!(state.error_estimate() <= previous_e);
    assert!(state.q().orthogonality_defect() <= 1e-10 * (state.rank() as f64).sqrt());
    state.error_estimate()
}

#[test]
fn exact_rank_recovery_all_algorithms() {
    for (r, seed) in [(1, 0), (3, 1), (5, 2), (10, 3)] {
        let a = low_rank(30, 40, r, seed);
        let svd = basic_rsvd(&a, r, 2, 0, seed).unwrap();
        assert!(relative_residual(&a, &svd) <= 1e-8, "basic r={r}");

        let state = fixed_precision_qb(&a, 1e-6, 20, 1, seed).unwrap();
        assert_eq!(state.rank(), r);
        assert!(dense_residual_sq(&a, &state).sqrt() <= 1e-8 * a.fro_norm_sq().sqrt());

        for q in [3, 4] {
            let svd = adaptive_pca(&a, 20, q, TerminationCriterion::FixedRank(r), seed).unwrap();
            assert_eq!(svd.rank(), r);
            assert!(relative_residual(&a, &svd) <= 1e-8, "adaptive r={r} q={q}");
        }
    }
}

#[test]
fn rank_five_refines_inside_first_block() {
    let a = low_rank(60, 45, 5, 21);
    let state = fixed_precision_qb(&a, 1e-6, 20, 0, 1).unwrap();
    assert_eq!((state.rank(), state.blocks()), (5, 1));
    let (svd, st) = adaptive_pca_with_state(&a, 20, 4, TerminationCriterion::FrobTolerance(1e-6), 1).unwrap();
    assert_eq!((svd.rank(), st.rank()), (5, 5));
    assert!(st.is_transposed());
    assert!(relative_residual(&a, &svd) <= 1e-8);
}

#[test]
fn diagonal_spectrum() {
    let mut triplets = vec![(0, 0, 10.0), (1, 1, 5.0), (2, 2, 1.0), (3, 3, 0.1)];
    triplets.iter_mut().for_each(|t| {
        t.0 += 3;
        t.1 *= 2;
    });
    let a = SparseRatings::from_triplets(20, 15, &triplets, (0.0, 10.0)).unwrap();
    let svd = basic_rsvd(&a, 2, 1, 2, 5).unwrap();
    assert!((svd.s[0] - 10.0).abs() < 1e-6 && (svd.s[1] - 5.0).abs() < 1e-6);
    let svd = adaptive_pca(&a, 4, 4, TerminationCriterion::FixedRank(2), 5).unwrap();
    assert!((svd.s[0] - 10.0).abs() < 1e-6 && (svd.s[1] - 5.0).abs() < 1e-6);
}

#[test]
fn basic_rsvd_preconditions() {
    let a = random_ratings(10, 12, 0.5, 0);
    assert!(matches!(basic_rsvd(&a, 8, 0, 3, 0), Err(Error::InvalidArgument(_))));
    assert!(matches!(basic_rsvd(&a, 0, 0, 3, 0), Err(Error::InvalidArgument(_))));
    // asking for more components than the rank
    let low = low_rank(10, 12, 2, 0);
    assert!(matches!(basic_rsvd(&low, 4, 0, 0, 0), Err(Error::RankDeficient { column: 2, .. })));
    // oversampling past the rank is fine
    let svd = basic_rsvd(&low, 2, 1, 6, 0).unwrap();
    assert!(svd.residual_fro(&low).unwrap() <= 1e-10 * low.fro_norm_sq().sqrt());
}

#[test]
fn basic_rsvd_descending_and_orthonormal() {
    let a = random_ratings(80, 60, 0.1, 3);
    let svd = basic_rsvd(&a, 10, 2, 5, 3).unwrap();
    assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    assert!(svd.u.orthogonality_defect() < 1e-10 && svd.v.orthogonality_defect() < 1e-10);
    assert_eq!((svd.u.shape(), svd.v.shape()), ((80, 10), (60, 10)));
}

#[test]
fn qb_invariants_after_every_block() {
    for seed in 0..4 {
        let a = random_ratings(90, 70, 0.08, seed);
        let mut e = f64::INFINITY;
        let mut qb = FixedPrecisionQb::new(&a, 7, 1, seed).unwrap();
        while qb.can_step() && qb.state().rank() < 40 {
            let state = qb.step().unwrap();
            e = check_block_invariants(&a, state, e);
        }
        for q in [3, 6] {
            let mut e = f64::INFINITY;
            let mut qb = AdaptiveQb::new(&a, 7, q, seed).unwrap();
            while qb.can_step() && qb.state().rank() < 40 {
                let state = qb.step().unwrap();
                e = check_block_invariants(&a, state, e);
            }
        }
    }
}

#[test]
fn pass_count_per_block() {
    let a = random_ratings(50, 40, 0.1, 8);
    for q in 2..=9 {
        let mut qb = AdaptiveQb::new(&a, 5, q, 1).unwrap();
        qb.step().unwrap();
        assert_eq!(qb.state().passes(), q, "q={q}");
        qb.step().unwrap();
        assert_eq!(qb.state().passes(), 2 * q, "q={q}");
    }
    for p in 0..3 {
        let mut qb = FixedPrecisionQb::new(&a, 5, p, 1).unwrap();
        qb.step().unwrap();
        assert_eq!(qb.state().passes(), 2 * p + 2);
    }
    assert!(AdaptiveQb::new(&a, 5, 1, 0).is_err());
}

#[test]
fn rank_k_near_optimal_on_geometric_decay() {
    let (a, s) = geometric_spectrum(120, 150, 0.8, 4);
    for (k, b) in [(10, 10), (15, 5), (25, 20)] {
        let optimal = s[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let svd = adaptive_pca(&a, b, 10, TerminationCriterion::FixedRank(k), 2).unwrap();
        let err = svd.residual_fro(&a).unwrap();
        assert!(err <= 1.01 * optimal, "k={k}: {err} vs {optimal}");
        let rel = svd.s.iter().zip(&s).map(|(g, w)| (g - w).abs() / w).fold(0.0, f64::max);
        assert!(rel <= 1e-2, "k={k}: singular values off by {rel:e}");
    }
}

#[test]
fn fixed_precision_equals_adaptive_with_matched_passes() {
    let a = random_ratings(80, 120, 0.05, 31);
    let norm = a.fro_norm_sq().sqrt();
    for p in 0..3 {
        let mut x = FixedPrecisionQb::new(&a, 6, p, 9).unwrap();
        let mut y = AdaptiveQb::new(&a, 6, 2 * p + 2, 9).unwrap();
        for _ in 0..3 {
            x.step().unwrap();
            y.step().unwrap();
        }
        let (sx, sy) = (x.state(), y.state());
        assert!(fro_diff(&sx.product(), &sy.product()) <= 1e-6 * norm, "p={p}");
        assert!(fro_diff(&projector(sx.q()), &projector(sy.q())) <= 1e-6, "p={p}");
    }
}

#[test]
fn loose_tolerance_stops_after_one_block() {
    let a = random_ratings(40, 50, 0.2, 2);
    let state = fixed_precision_qb(&a, 0.999, 8, 1, 0).unwrap();
    assert_eq!(state.blocks(), 1);
    assert!(state.rank() <= 8);
    let svd = adaptive_pca(&a, 8, 5, TerminationCriterion::FrobTolerance(0.999), 0).unwrap();
    assert!(svd.rank() <= 8);
}

#[test]
fn tolerance_is_met_and_rank_is_minimal_within_block() {
    let a = random_ratings(100, 80, 0.1, 6);
    for eps in [0.3, 0.5, 0.7] {
        let state = fixed_precision_qb(&a, eps, 10, 2, 1).unwrap();
        let residual = dense_residual_sq(&a, &state).sqrt();
        assert!(residual < eps * a.fro_norm_sq().sqrt());
        // dropping the last vector must violate the tolerance
        let mut shorter = state.clone();
        shorter.truncate(state.rank() - 1);
        assert!(dense_residual_sq(&a, &shorter).sqrt() >= eps * a.fro_norm_sq().sqrt() - 1e-9);
    }
}

#[test]
fn exhaustion_carries_state() {
    let a = random_ratings(30, 40, 0.5, 1);
    match fixed_precision_qb(&a, 1e-12, 7, 0, 0) {
        Err(Error::Exhausted { rank, cap, state }) => {
            assert_eq!((rank, cap), (28, 30));
            assert_eq!(state.rank(), 28);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
    assert!(matches!(
        adaptive_pca(&a, 7, 4, TerminationCriterion::FrobTolerance(1e-12), 0),
        Err(Error::Exhausted { .. })
    ));
    assert!(adaptive_pca(&a, 7, 4, TerminationCriterion::FixedRank(31), 0).is_err());
}

#[test]
fn tall_input_is_handled_through_transpose() {
    let a = random_ratings(90, 40, 0.15, 12);
    let oracle = dense_svd(&a.to_dense());
    let svd = adaptive_pca(&a, 5, 8, TerminationCriterion::FixedRank(6), 3).unwrap();
    assert_eq!((svd.u.shape(), svd.v.shape()), ((90, 6), (40, 6)));
    // flat spectrum and no oversampling: only the leading value is sharp
    assert!((svd.s[0] - oracle.s[0]).abs() <= 1e-3 * oracle.s[0]);
    assert!(svd.s.iter().zip(&oracle.s).all(|(g, w)| g <= &(w * (1.0 + 1e-12))));
    assert!(svd.residual_fro(&a).unwrap() <= 1.05 * oracle.s[6..].iter().map(|x| x * x).sum::<f64>().sqrt());
    let wide = adaptive_pca(&a.transpose(), 5, 8, TerminationCriterion::FixedRank(6), 3).unwrap();
    for (x, y) in svd.s.iter().zip(&wide.s) {
        assert!((x - y).abs() <= 1e-9 * x);
    }
}

#[test]
fn callback_criterion_sees_every_block() {
    let a = random_ratings(60, 50, 0.1, 5);
    let mut seen = Vec::new();
    let svd = adaptive_pca(
        &a,
        4,
        5,
        TerminationCriterion::Callback(Box::new(|s: &QbState| {
            seen.push(s.rank());
            Ok(s.blocks() == 3)
        })),
        0,
    )
    .unwrap();
    assert_eq!(seen, vec![4, 8, 12]);
    assert_eq!(svd.rank(), 12);
}

#[test]
fn determinism() {
    let a = random_ratings(60, 50, 0.1, 5);
    let run = || adaptive_pca(&a, 5, 7, TerminationCriterion::FrobTolerance(0.6), 42).unwrap();
    let (x, y) = (run(), run());
    assert_eq!(x.s, y.s);
    assert_eq!(x.u, y.u);
}

#[test]
fn invalid_arguments() {
    let a = random_ratings(20, 20, 0.3, 0);
    assert!(fixed_precision_qb(&a, 1.0, 5, 0, 0).is_err());
    assert!(fixed_precision_qb(&a, 0.5, 0, 0, 0).is_err());
    assert!(adaptive_pca(&a, 5, 4, TerminationCriterion::FixedRank(0), 0).is_err());
    assert!(adaptive_pca(&a, 5, 4, TerminationCriterion::FrobTolerance(1.5), 0).is_err());
}
