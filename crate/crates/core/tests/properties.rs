use proptest::prelude::*;

use transhop::analytics::{p1, p2, p3, p3_distributed, p3_symmetric, tau3_quantile};
use transhop::oracle::sample_batch;
use transhop::{CommParams, TrafficConditions};

fn conditions() -> impl Strategy<Value = TrafficConditions> {
    (5.0f64..45.0, 5.0f64..45.0, 0.0f64..0.12, 0.001f64..0.12, 0.001f64..1.0)
        .prop_map(|(v1, v2, rho1, rho2, alpha)| TrafficConditions::new(v1, v2, rho1, rho2, alpha).unwrap())
}

fn ranges() -> impl Strategy<Value = (f64, f64)> {
    (20.0f64..600.0, 50.0f64..4000.0)
}

fn all_cdfs(tau: f64, tc: &TrafficConditions, r: f64, r_min: f64) -> [f64; 5] {
    let fixed = CommParams::fixed(r, r_min).unwrap();
    let dist = CommParams::exponential(1.0 / r, r_min).unwrap();
    [
        p1(tau, tc, r).unwrap(),
        p2(tau, tc, &fixed).unwrap(),
        p3(tau, tc, &fixed).unwrap(),
        p3_symmetric(tau, tc.lambda2(), tc.v2, &fixed).unwrap(),
        p3_distributed(tau, tc, &dist).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn cdfs_are_monotone_probabilities(
        tc in conditions(),
        (r, r_min) in ranges(),
        a in -50.0f64..2000.0,
        b in -50.0f64..2000.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let pl = all_cdfs(lo, &tc, r, r_min);
        let ph = all_cdfs(hi, &tc, r, r_min);
        for (x, y) in pl.iter().zip(&ph) {
            prop_assert!((0.0..=1.0).contains(x) && (0.0..=1.0).contains(y));
            prop_assert!(x <= y, "{pl:?} at {lo} vs {ph:?} at {hi}");
        }
    }

    #[test]
    fn nothing_arrives_before_the_minimum_time(
        tc in conditions(),
        (r, r_min) in ranges(),
        early in 0.0f64..1.0,
    ) {
        let cp = CommParams::fixed(r, r_min).unwrap();
        let t0 = cp.tau_min(tc.v2).unwrap();
        let tau = t0 - early.max(1e-9) * (1.0 + t0.abs());
        prop_assert_eq!(p2(tau, &tc, &cp).unwrap(), 0.0);
        prop_assert_eq!(p3(tau, &tc, &cp).unwrap(), 0.0);
    }

    #[test]
    fn p2_ignores_direction_one(
        tc in conditions(),
        (r, r_min) in ranges(),
        v1 in 5.0f64..45.0,
        rho1 in 0.0f64..0.12,
        tau in 0.0f64..1500.0,
    ) {
        let cp = CommParams::fixed(r, r_min).unwrap();
        let other = TrafficConditions::new(v1, tc.v2, rho1, tc.rho2, tc.alpha).unwrap();
        prop_assert_eq!(p2(tau, &tc, &cp).unwrap().to_bits(), p2(tau, &other, &cp).unwrap().to_bits());
    }

    #[test]
    fn symmetric_case_reduces(
        v in 5.0f64..45.0,
        rho in 0.001f64..0.12,
        alpha in 0.001f64..1.0,
        (r, r_min) in ranges(),
        tau in 0.0f64..2000.0,
    ) {
        let tc = TrafficConditions::symmetric(v, rho, alpha).unwrap();
        let cp = CommParams::fixed(r, r_min).unwrap();
        let a = p3(tau, &tc, &cp).unwrap();
        let b = p3_symmetric(tau, alpha * rho, v, &cp).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(f64::MIN_POSITIVE), "{a} vs {b}");
    }

    #[test]
    fn quantile_inverts_the_symmetric_cdf(
        v in 5.0f64..45.0,
        lambda in 1e-5f64..0.05,
        (r, r_min) in ranges(),
        q in 0.001f64..0.999,
    ) {
        let cp = CommParams::fixed(r, r_min).unwrap();
        let t = tau3_quantile(q, lambda, v, &cp).unwrap();
        let back = p3_symmetric(t, lambda, v, &cp).unwrap();
        // the symmetric cdf has an atom at tau_min when r_min < 2r
        let atom = p3_symmetric(cp.tau_min(v).unwrap(), lambda, v, &cp).unwrap();
        if q > atom {
            prop_assert!((back - q).abs() < 1e-10, "{back} vs {q}");
        }
    }

    #[test]
    fn partial_densities_are_ordered(tc in conditions()) {
        prop_assert!(tc.lambda1() >= 0.0 && tc.lambda2() >= 0.0);
        prop_assert!(tc.lambda_tilde1() >= tc.lambda1());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_samples_are_finite_ordered_and_reproducible(
        tc in conditions(),
        (r, r_min) in ranges(),
        seed in any::<u64>(),
    ) {
        prop_assume!(tc.lambda1() > 0.0);
        let cp = CommParams::fixed(r, r_min).unwrap();
        let a = sample_batch(200, &tc, &cp, seed).unwrap();
        prop_assert_eq!(&a, &sample_batch(200, &tc, &cp, seed).unwrap());
        for s in &a {
            prop_assert!(s.tau1.is_finite() && s.tau2.is_finite() && s.tau3.is_finite());
            prop_assert!(s.tau1 >= 0.0 && s.tau2 >= 0.0 && s.tau3 >= s.tau2);
        }
    }
}
