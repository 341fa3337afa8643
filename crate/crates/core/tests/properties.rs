//! Randomized invariants over the linear algebra and screening layers.
//!
//! Each property states an identity or monotonicity fact that must hold for
//! every well-posed input, so proptest shrinking points straight at the
//! smallest violating problem.

use airholp::airholp::{
    estimate_expected_response, minimize_penalty, penalty_objective, PenaltyObjectiveContext,
};
use airholp::linalg::{
    self, DesignMatrix, StandardizeOptions, DEFAULT_RANK_TOL,
};
use airholp::metrics::{multiple_r, MultipleROptions};
use airholp::screening::{screen_sis, MethodTag, ScreeningResult};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// A random screening problem: n rows, p columns, all entries finite.
fn problem(
    n_range: std::ops::RangeInclusive<usize>,
    p_range: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (n_range, p_range).prop_flat_map(|(n, p)| {
        (
            Just(n),
            Just(p),
            proptest::collection::vec(-5.0..5.0f64, n * p),
            proptest::collection::vec(-5.0..5.0f64, n),
        )
    })
}

fn build(n: usize, p: usize, xs: &[f64], ys: &[f64]) -> (DesignMatrix, DVector<f64>) {
    let x = DesignMatrix::from_row_major(n, p, xs).expect("finite data");
    let y = DVector::from_column_slice(ys);
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The dual and primal ridge solves compute the same coefficients.
    #[test]
    fn dual_and_primal_ridge_agree(
        (n, p, xs, ys) in problem(3..=25, 1..=60),
        r in prop_oneof![Just(0.01), Just(1.0), Just(10.0), 0.01..500.0],
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let dual = linalg::ridge_dual_direct(&x, &y, r).unwrap();
        let primal = linalg::ridge_primal(&x, &y, r).unwrap();
        let tol = 1e-8 * (1.0 + primal.norm());
        prop_assert!((&dual - &primal).norm() <= tol,
            "dual/primal gap {} over tol {}", (&dual - &primal).norm(), tol);
    }

    /// A larger ridge penalty never grows the coefficient norm.
    #[test]
    fn ridge_norm_shrinks_with_penalty(
        (n, p, xs, ys) in problem(3..=20, 1..=40),
        r_lo in 0.01..50.0f64,
        factor in 1.0..100.0f64,
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let r_hi = r_lo * factor;
        let lo = linalg::ridge_dual_direct(&x, &y, r_lo).unwrap();
        let hi = linalg::ridge_dual_direct(&x, &y, r_hi).unwrap();
        prop_assert!(hi.norm() <= lo.norm() * (1.0 + 1e-10),
            "norm grew from {} at r={} to {} at r={}", lo.norm(), r_lo, hi.norm(), r_hi);
    }

    /// Fitted responses shrink toward zero as the penalty grows.
    #[test]
    fn fitted_norm_shrinks_with_penalty(
        (n, p, xs, ys) in problem(3..=20, 1..=40),
        r_lo in 0.0..50.0f64,
        step in 0.01..100.0f64,
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let eig = linalg::sym_eigen(&linalg::row_gram(&x), DEFAULT_RANK_TOL).unwrap();
        let lo = linalg::fitted_response(&y, r_lo, &eig).unwrap();
        let hi = linalg::fitted_response(&y, r_lo + step, &eig).unwrap();
        prop_assert!(hi.norm() <= lo.norm() * (1.0 + 1e-10));
    }

    /// Rescaling the response leaves every ridge ranking unchanged.
    #[test]
    fn ridge_ranking_ignores_response_scale(
        (n, p, xs, ys) in problem(3..=20, 2..=40),
        scale in 0.01..100.0f64,
        r in 0.01..100.0f64,
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let base = linalg::ridge_dual_direct(&x, &y, r).unwrap();
        let scaled = linalg::ridge_dual_direct(&x, &(&y * scale), r).unwrap();
        let rank_base = airholp::screening::rank_by_magnitude(base.as_slice());
        let rank_scaled = airholp::screening::rank_by_magnitude(scaled.as_slice());
        prop_assert_eq!(rank_base, rank_scaled);
    }

    /// Rescaling the whole design leaves the unpenalized ranking unchanged.
    #[test]
    fn holp_ranking_ignores_design_scale(
        (n, p, xs, ys) in problem(3..=15, 2..=40),
        scale in 0.1..10.0f64,
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let xs_scaled: Vec<f64> = xs.iter().map(|v| v * scale).collect();
        let x_scaled = DesignMatrix::from_row_major(n, p, &xs_scaled).unwrap();
        let eig = linalg::sym_eigen(&linalg::row_gram(&x), DEFAULT_RANK_TOL).unwrap();
        let eig_scaled =
            linalg::sym_eigen(&linalg::row_gram(&x_scaled), DEFAULT_RANK_TOL).unwrap();
        let base = airholp::screen_holp(&x, &y, &eig, p).unwrap();
        let scaled = airholp::screen_holp(&x_scaled, &y, &eig_scaled, p).unwrap();
        // ranks are stable only where scores are well separated
        let gap_ok = well_separated(&base.scores);
        prop_assume!(gap_ok);
        prop_assert_eq!(base.ranking, scaled.ranking);
    }

    /// With a huge penalty the ridge ranking collapses to the marginal one.
    #[test]
    fn huge_penalty_ridge_matches_sis(
        (n, p, xs, ys) in problem(4..=20, 2..=40),
    ) {
        let (x_raw, y_raw) = build(n, p, &xs, &ys);
        let (x, report) = linalg::standardize(&x_raw, StandardizeOptions::default());
        prop_assume!(report.constant_columns.is_empty());
        let (y, _) = linalg::center_response(&y_raw);
        prop_assume!(y.norm() > 1e-9);
        let sis = screen_sis(&x, &y, p).unwrap();
        prop_assume!(well_separated(&sis.scores));
        let ridge = linalg::ridge_dual_direct(&x, &y, 1e12).unwrap();
        let rank_ridge = airholp::screening::rank_by_magnitude(ridge.as_slice());
        prop_assert_eq!(sis.ranking, rank_ridge);
    }

    /// The eigenbasis objective equals the fitted-response inner products it
    /// stands for, up to the target's constant square.
    #[test]
    fn objective_matches_fitted_inner_products(
        (n, p, xs, ys) in problem(3..=15, 1..=30),
        ts in proptest::collection::vec(-5.0..5.0f64, 15),
        r in 0.0..1000.0f64,
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let target = DVector::from_column_slice(&ts[..n]);
        let eig = linalg::sym_eigen(&linalg::row_gram(&x), DEFAULT_RANK_TOL).unwrap();
        let ctx = PenaltyObjectiveContext::from_eigen(&eig, &y, &target, 1000.0).unwrap();
        prop_assume!(r <= ctx.r_max());
        let g = penalty_objective(&ctx, r).unwrap();
        let fitted = linalg::fitted_response(&y, r, &eig).unwrap();
        let direct = fitted.dot(&fitted) - 2.0 * target.dot(&fitted);
        prop_assert!((g - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
            "objective {} vs direct {}", g, direct);
    }

    /// The minimizer always lands inside the search interval.
    #[test]
    fn minimizer_stays_in_interval(
        (n, p, xs, ys) in problem(3..=15, 1..=30),
        ts in proptest::collection::vec(-5.0..5.0f64, 15),
        c in 1.0..2000.0f64,
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let target = DVector::from_column_slice(&ts[..n]);
        let eig = linalg::sym_eigen(&linalg::row_gram(&x), DEFAULT_RANK_TOL).unwrap();
        let ctx = PenaltyObjectiveContext::from_eigen(&eig, &y, &target, c).unwrap();
        let r = minimize_penalty(&ctx).unwrap();
        prop_assert!(r.is_finite());
        prop_assert!((0.0..=ctx.r_max()).contains(&r));
        // no grid point may beat the reported minimizer
        let g_star = penalty_objective(&ctx, r).unwrap();
        for k in 0..=40 {
            let probe = (ctx.r_max() * k as f64 / 40.0).min(ctx.r_max());
            let g = penalty_objective(&ctx, probe).unwrap();
            prop_assert!(g_star <= g + 1e-9 * (1.0 + g.abs()),
                "probe r={} gives {} below minimizer's {}", probe, g, g_star);
        }
    }

    /// With every column screened, a response built from the columns and an
    /// intercept comes back from the refit unchanged.
    #[test]
    fn refit_reproduces_fully_spanned_responses(
        (n, p, xs, _) in problem(8..=14, 1..=5),
        coefs in proptest::collection::vec(-3.0..3.0f64, 6),
        r in 0.01..100.0f64,
    ) {
        let (x, _) = build(n, p, &xs, &vec![0.0; n]);
        let mut y = DVector::from_element(n, coefs[0]);
        for j in 0..p {
            y += x.matrix().column(j) * coefs[j + 1];
        }
        prop_assume!(y.norm() > 1e-6);
        let eig = linalg::sym_eigen(&linalg::row_gram(&x), DEFAULT_RANK_TOL).unwrap();
        let fitted = estimate_expected_response(&x, &y, r, p, &eig).unwrap();
        prop_assert!((&fitted - &y).norm() <= 1e-7 * (1.0 + y.norm()),
            "refit misses spanned response by {}", (&fitted - &y).norm());
    }

    /// The refit equals the orthogonal projection of the response onto the
    /// screened columns plus intercept, checked against Gram-Schmidt.
    #[test]
    fn refit_matches_projection_oracle(
        (n, p, xs, ys) in problem(8..=14, 1..=6),
        r in 0.01..100.0f64,
        m_seed in 1usize..=6,
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        let m = m_seed.min(p);
        let eig = linalg::sym_eigen(&linalg::row_gram(&x), DEFAULT_RANK_TOL).unwrap();
        // mirror the refit's screened set, then project independently
        let coef = linalg::ridge_dual(&x, &y, r, &eig).unwrap();
        let order = airholp::screening::rank_by_magnitude(coef.as_slice());
        let mut basis: Vec<DVector<f64>> = vec![DVector::from_element(n, 1.0)];
        for &j in &order[..m] {
            basis.push(x.matrix().column(j).into_owned());
        }
        let ortho = gram_schmidt(&basis);
        // skip near-degenerate spans where rank decisions could differ
        prop_assume!(ortho.len() == basis.len());
        let mut projected = DVector::zeros(n);
        for q in &ortho {
            projected += q * q.dot(&y);
        }
        let fitted = estimate_expected_response(&x, &y, r, m, &eig).unwrap();
        prop_assert!((&fitted - &projected).norm() <= 1e-8 * (1.0 + projected.norm()),
            "refit differs from projection by {}", (&fitted - &projected).norm());
    }

    /// Best subset correlation never decreases when the model may grow.
    #[test]
    fn multiple_r_is_monotone_in_k(
        (n, p, xs, ys) in problem(6..=15, 2..=6),
    ) {
        let (x, y) = build(n, p, &xs, &ys);
        prop_assume!({
            let (yc, _) = linalg::center_response(&y);
            yc.norm() > 1e-9
        });
        let opts = MultipleROptions::default();
        let mut last = 0.0;
        for k in 1..=p.min(3) {
            let best = multiple_r(&y, x.matrix(), k, &opts).unwrap();
            prop_assert!(best.r >= last - 1e-12,
                "R dropped from {} to {} at k={}", last, best.r, k);
            last = best.r;
        }
    }

    /// Tied scores rank by index, and reranking is deterministic.
    #[test]
    fn tie_breaks_are_deterministic(
        scores in proptest::collection::vec(prop_oneof![Just(0.5), Just(-0.5), Just(2.0)], 2..30),
    ) {
        let a = ScreeningResult::from_scores(scores.clone(), 1, MethodTag::Sis).unwrap();
        let b = ScreeningResult::from_scores(scores.clone(), 1, MethodTag::Sis).unwrap();
        prop_assert_eq!(&a.ranking, &b.ranking);
        for w in a.ranking.windows(2) {
            let (i, j) = (w[0], w[1]);
            if scores[i].abs() == scores[j].abs() {
                prop_assert!(i < j, "tie between {} and {} not broken by index", i, j);
            }
        }
    }
}

/// True when every pair of absolute scores differs by a workable margin.
fn well_separated(scores: &[f64]) -> bool {
    let mut mags: Vec<f64> = scores.iter().map(|s| s.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    mags.windows(2)
        .all(|w| w[1] - w[0] > 1e-6 * (1.0 + w[1]))
}

/// Modified Gram-Schmidt with reorthogonalization; vectors that collapse
/// under 1e-8 of their original norm are dropped as dependent.
fn gram_schmidt(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let original = v.norm();
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &ortho {
                let proj = q.dot(&w);
                w -= q * proj;
            }
        }
        if w.norm() > 1e-8 * original {
            let norm = w.norm();
            ortho.push(w / norm);
        }
    }
    ortho
}

/// Single deterministic regression: a spanned response with duplicate
/// columns still refits exactly through the minimum-norm route.
#[test]
fn refit_handles_duplicate_columns() {
    let xs = [
        1.0, 1.0, 2.0, //
        2.0, 2.0, -1.0, //
        -1.0, -1.0, 0.5, //
        0.5, 0.5, 1.5, //
        1.5, 1.5, 0.0, //
    ];
    let x = DesignMatrix::from_row_major(5, 3, &xs).unwrap();
    // y = 1 + 2 c0 + 1 c2, inside the screened span despite c0 = c1
    let y = DVector::from_fn(5, |i, _| {
        1.0 + 2.0 * x.matrix()[(i, 0)] + x.matrix()[(i, 2)]
    });
    let eig = linalg::sym_eigen(&linalg::row_gram(&x), DEFAULT_RANK_TOL).unwrap();
    let fitted = estimate_expected_response(&x, &y, 1.0, 3, &eig).unwrap();
    assert!((&fitted - &y).norm() <= 1e-8, "gap {}", (&fitted - &y).norm());
}

/// The greedy fallback agrees with exhaustive search on a nested problem
/// where forward selection is provably optimal.
#[test]
fn greedy_matches_exhaustive_on_orthogonal_columns() {
    let n = 8;
    let mut x = DMatrix::zeros(n, 3);
    for i in 0..n {
        x[(i, 0)] = if i % 2 == 0 { 1.0 } else { -1.0 };
        x[(i, 1)] = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
        x[(i, 2)] = if (i / 4) % 2 == 0 { 1.0 } else { -1.0 };
    }
    let y = DVector::from_fn(n, |i, _| {
        3.0 * x[(i, 0)] + 2.0 * x[(i, 1)] + 1.0 * x[(i, 2)]
    });
    let exhaustive = MultipleROptions::default();
    let greedy = MultipleROptions { subset_cap: 0 };
    for k in 1..=3 {
        let a = multiple_r(&y, &x, k, &exhaustive).unwrap();
        let b = multiple_r(&y, &x, k, &greedy).unwrap();
        assert!(a.exhaustive);
        assert!(!b.exhaustive);
        assert_eq!(a.subset, b.subset, "k={k}");
        assert!((a.r - b.r).abs() <= 1e-12);
    }
}
