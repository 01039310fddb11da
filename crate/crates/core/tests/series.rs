use khintype::scalar::binomial;
use khintype::series::{applicability, classify_gseries, partial_sum_probe, Convergence, DimensionFunction, SeriesSpec};
use num_rational::BigRational;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

proptest! {
    #[test]
    fn full_dimension_gauge_follows_the_closed_form(d in 1u64..=8, m in 1u64..=30, k in 1u64..=2) {
        let n = d + m;
        let c = classify_gseries(&r(n as i64, 1), n, m, k).unwrap();
        prop_assert_eq!(c.verdict == Convergence::Converges, 2 * m < k * (n - 1));
        prop_assert_eq!(c.critical, 2 * m == k * (n - 1));
    }

    #[test]
    fn verdict_is_monotone_in_s(num in 1i64..200, den in 1i64..20, m in 1u64..6, k in 1u64..3) {
        let n = m + 3;
        let s = r(num, den);
        let up = &s + r(1, 7);
        let lo = classify_gseries(&s, n, m, k).unwrap().verdict;
        let hi = classify_gseries(&up, n, m, k).unwrap().verdict;
        prop_assert!(!(lo == Convergence::Converges && hi == Convergence::Diverges));
    }
}

#[test]
fn cases_follow_the_dimension_counts() {
    let a = applicability(4, 1, 1, &r(5, 1)).unwrap();
    assert!(a.case1 && !a.case2);
    assert_eq!(a.summary, "Case 1 applies; CONVERGES");
    for d in 2..=6u64 {
        let top = binomial(d as usize + 1, 2) as u64;
        assert!(applicability(d, top - 1, 2, &r(1, 1)).unwrap().case2);
        assert!(!applicability(d, top, 2, &r(1, 1)).unwrap().case2);
    }
    assert!(applicability(0, 1, 1, &r(1, 1)).is_err());
}

#[test]
fn probes_agree_away_from_the_critical_exponent() {
    // s(1 + k/(2m+k)) = n + 1 ± 2 keeps the log factors from deciding
    for (d, m, k) in [(3u64, 1u64, 1u64), (2, 2, 2), (4, 2, 2), (5, 1, 1)] {
        let n = d + m;
        for sign in [-2i64, 2] {
            let s = r((n as i64 + 1 + sign) * (2 * m + k) as i64, (2 * m + 2 * k) as i64);
            let exact = classify_gseries(&s, n, m, k).unwrap().verdict;
            let g = DimensionFunction::power(s).unwrap();
            let probe = partial_sum_probe(&SeriesSpec::GSeries { g, n, m, k }, 200_000).unwrap();
            assert_eq!(probe.verdict, exact, "d={d} m={m} k={k} sign={sign}");
        }
    }
}
