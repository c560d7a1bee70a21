//! Algebraic laws that must hold for every valid input.

use approx::assert_abs_diff_eq;
use evidfuse::loss::{integrated_ce, kl_to_uniform, masked_alpha, AnnealSchedule, OneHotLabel};
use evidfuse::metrics::auc_binary;
use evidfuse::special::{digamma, log_gamma, trigamma};
use evidfuse::views::ViewGeometry;
use evidfuse::{combine_many, combine_pair, evidence_to_opinion, opinion_to_dirichlet, vacuous_opinion, DirichletParams, Evidence, Opinion};
use proptest::prelude::*;

fn evidence(max_classes: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_classes).prop_flat_map(|c| prop::collection::vec(0.0..1e3f64, c))
}

fn opinion_of(e: Vec<f64>) -> Opinion {
    evidence_to_opinion(&Evidence::new(e).unwrap())
}

/// Three opinions over the same class count.
fn triple() -> impl Strategy<Value = (Opinion, Opinion, Opinion)> {
    (2..=6usize).prop_flat_map(|c| {
        let v = || prop::collection::vec(0.0..50.0f64, c).prop_map(opinion_of);
        (v(), v(), v())
    })
}

fn assert_opinion_close(a: &Opinion, b: &Opinion, tol: f64) {
    assert_abs_diff_eq!(a.uncertainty(), b.uncertainty(), epsilon = tol);
    for (x, y) in a.beliefs().iter().zip(b.beliefs()) {
        assert_abs_diff_eq!(x, y, epsilon = tol);
    }
}

proptest! {
    #[test]
    fn opinion_masses_sum_to_one(e in evidence(10)) {
        let op = opinion_of(e);
        let total = op.uncertainty() + op.beliefs().iter().sum::<f64>();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(op.uncertainty() > 0.0 && op.uncertainty() <= 1.0);
    }

    #[test]
    fn evidence_survives_round_trip(e in evidence(10)) {
        let c = e.len();
        let op = opinion_of(e.clone());
        let back = opinion_to_dirichlet(&op, c).unwrap().to_evidence();
        for (x, y) in e.iter().zip(back.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * x.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn fusion_commutes((a, b, _) in triple()) {
        let ab = combine_pair(&a, &b).unwrap();
        let ba = combine_pair(&b, &a).unwrap();
        assert_opinion_close(&ab.combined, &ba.combined, 1e-12);
        prop_assert!((ab.conflicts[0] - ba.conflicts[0]).abs() <= 1e-12);
    }

    #[test]
    fn fusion_associates((a, b, c) in triple()) {
        let left = combine_many(&[a.clone(), b.clone(), c.clone()]).unwrap().combined;
        let bc = combine_pair(&b, &c).unwrap().combined;
        let right = combine_pair(&a, &bc).unwrap().combined;
        assert_opinion_close(&left, &right, 1e-9);
    }

    #[test]
    fn vacuous_is_identity(e in evidence(8)) {
        let op = opinion_of(e);
        let v = vacuous_opinion(op.num_classes()).unwrap();
        let f = combine_pair(&v, &op).unwrap();
        prop_assert_eq!(&f.combined, &op);
        prop_assert_eq!(f.conflicts[0], 1.0);
        prop_assert_eq!(&combine_pair(&op, &v).unwrap().combined, &op);
    }

    #[test]
    fn fusion_never_increases_uncertainty((a, b, _) in triple()) {
        let f = combine_pair(&a, &b).unwrap().combined;
        prop_assert!(f.uncertainty() <= a.uncertainty().min(b.uncertainty()));
    }

    #[test]
    fn fold_matches_manual_pairs((a, b, c) in triple()) {
        let f = combine_many(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let ab = combine_pair(&a, &b).unwrap();
        let abc = combine_pair(&ab.combined, &c).unwrap();
        prop_assert_eq!(&f.combined, &abc.combined);
        prop_assert_eq!(f.conflicts, vec![ab.conflicts[0], abc.conflicts[0]]);
    }

    #[test]
    fn digamma_recurrence(x in 1e-3..1e4f64) {
        let lhs = digamma(x + 1.0).unwrap();
        let rhs = digamma(x).unwrap() + 1.0 / x;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn trigamma_recurrence(x in 1e-3..1e4f64) {
        let lhs = trigamma(x + 1.0).unwrap();
        let rhs = trigamma(x).unwrap() - 1.0 / (x * x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * trigamma(x).unwrap().max(1.0));
    }

    #[test]
    fn log_gamma_recurrence(x in 1e-3..1e4f64) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn kl_is_non_negative(alpha in prop::collection::vec(1.0..100.0f64, 2..8), y in 0usize..8) {
        let c = alpha.len();
        let a = DirichletParams::new(alpha).unwrap();
        let label = OneHotLabel::new(y % c, c).unwrap();
        prop_assert!(kl_to_uniform(&masked_alpha(&a, &label).unwrap()) >= 0.0);
        prop_assert!(kl_to_uniform(&a) >= 0.0);
    }

    #[test]
    fn ice_is_positive_and_drops_with_target_evidence(alpha in prop::collection::vec(1.0..100.0f64, 2..6), extra in 0.1..50.0f64) {
        let c = alpha.len();
        let y = OneHotLabel::new(0, c).unwrap();
        let base = integrated_ce(&DirichletParams::new(alpha.clone()).unwrap(), &y).unwrap();
        let mut more = alpha;
        more[0] += extra;
        let after = integrated_ce(&DirichletParams::new(more).unwrap(), &y).unwrap();
        prop_assert!(base > 0.0);
        prop_assert!(after < base);
    }

    #[test]
    fn lambda_ramp_is_monotone_and_bounded(total in 1usize..500) {
        let s = AnnealSchedule::new(total);
        let mut prev = s.lambda_at(0);
        prop_assert_eq!(prev, 0.0);
        for t in 1..total + 5 {
            let l = s.lambda_at(t);
            prop_assert!(l >= prev && l <= 1.0);
            prev = l;
        }
        prop_assert_eq!(prev, 1.0);
    }

    #[test]
    fn auc_ignores_monotone_transforms(
        pts in prop::collection::vec((-5.0..5.0f64, any::<bool>()), 2..200),
    ) {
        let scores: Vec<f64> = pts.iter().map(|p| (p.0 * 4.0).round() / 4.0).collect();
        let labels: Vec<bool> = pts.iter().map(|p| p.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let base = auc_binary(&scores, &labels).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| s.exp() * 3.0 + 7.0).collect();
        prop_assert_eq!(base, auc_binary(&warped, &labels).unwrap());
        let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc_binary(&flipped, &labels).unwrap() - (1.0 - base)).abs() < 1e-12);
    }

    #[test]
    fn geometry_counts_windows(window in 1usize..64, stride in 1usize..32, steps in 0usize..8) {
        let g = ViewGeometry { roi: window + steps * stride, window, stride };
        g.validate().unwrap();
        prop_assert_eq!(g.windows_per_axis(), steps + 1);
        prop_assert_eq!(g.num_views(), (steps + 1) * (steps + 1));
        let origins = g.origins();
        prop_assert_eq!(origins.len(), g.num_views());
        prop_assert!(origins.iter().all(|&(r, c)| r + window <= g.roi && c + window <= g.roi));
    }

    #[test]
    fn geometry_rejects_misaligned_stride(window in 1usize..64, stride in 2usize..32, steps in 0usize..8, off in 1usize..32) {
        let off = off % stride;
        prop_assume!(off != 0);
        let g = ViewGeometry { roi: window + steps * stride + off, window, stride };
        prop_assert!(g.validate().is_err());
    }
}
