mod common;

use common::{naive_points, random_case};
use khintype::counting::{count_r, enumerate_r, CountQuery, Theta};
use khintype::manifold::builtin;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn points(case: &common::Case) -> Vec<(Vec<i64>, Vec<BigInt>)> {
    let q = CountQuery::new(case.q, case.kappa.clone(), case.theta.clone()).unwrap();
    enumerate_r(&case.spec, &q)
        .unwrap()
        .points
        .into_iter()
        .map(|p| (p.a, p.b))
        .collect()
}

#[test]
fn matches_brute_force_on_random_maps() {
    for (i, (d, m)) in [(1, 1), (2, 1), (2, 2), (1, 2)].iter().cycle().take(60).enumerate() {
        let case = random_case(1000 + i as u64, *d, *m, 30);
        let expected = naive_points(&case.spec, case.q, &case.kappa, &case.theta);
        assert_eq!(points(&case), expected, "case {i}: {}", case.spec.map.to_source());
    }
}

#[test]
fn huge_coefficients_take_the_bigint_path() {
    // q^3 * 10^30 overflows i128 in the integer form
    let spec = khintype::ManifoldSpec::from_source("big", "1000000000000000000000000000000*a1^3 + a1/7", 1, 1).unwrap();
    let theta = Theta::from_flat(1, 1, vec![r(1, 3), r(2, 5)]).unwrap();
    let kappa = r(1, 2);
    let q = CountQuery::new(40, kappa.clone(), theta.clone()).unwrap();
    let got: Vec<_> = enumerate_r(&spec, &q).unwrap().points.into_iter().map(|p| (p.a, p.b)).collect();
    assert_eq!(got, naive_points(&spec, 40, &kappa, &theta));
    assert_eq!(count_r(&spec, &q).unwrap(), got.len() as u64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn count_grows_with_kappa(seed in 0u64..10_000, num in 1i64..20) {
        let case = random_case(seed, 2, 1, 25);
        let small = CountQuery::new(case.q, r(num, 16), case.theta.clone()).unwrap();
        let large = CountQuery::new(case.q, r(num + 3, 16), case.theta.clone()).unwrap();
        prop_assert!(count_r(&case.spec, &small).unwrap() <= count_r(&case.spec, &large).unwrap());
    }

    #[test]
    fn integer_shifts_of_theta_are_invisible(seed in 0u64..10_000, dl in -3i64..4, dg in -3i64..4) {
        // λ ↦ λ + e moves every a by -e and γ ↦ γ + e moves every b by -e
        let case = random_case(seed, 2, 2, 25);
        let base = CountQuery::new(case.q, case.kappa.clone(), case.theta.clone()).unwrap();
        let mut shifted = case.theta.clone();
        shifted.lambda[0] += r(dl, 1);
        shifted.gamma[1] += r(dg, 1);
        let moved = CountQuery::new(case.q, case.kappa.clone(), shifted).unwrap();
        let a = enumerate_r(&case.spec, &base).unwrap();
        let b = enumerate_r(&case.spec, &moved).unwrap();
        prop_assert_eq!(a.count, b.count);
        for (p, s) in a.points.iter().zip(&b.points) {
            prop_assert_eq!(p.a[0] - dl, s.a[0]);
            prop_assert_eq!(&p.b[1] - BigInt::from(dg), s.b[1].clone());
        }
    }

    #[test]
    fn trivial_bound(seed in 0u64..10_000) {
        // at most #a · (2κ + 1)^m points
        let case = random_case(seed, 2, 2, 30);
        let q = CountQuery::new(case.q, case.kappa.clone(), case.theta.clone()).unwrap();
        let n = count_r(&case.spec, &q).unwrap() as f64;
        let qf = case.q as f64;
        let side = |i: usize| {
            use num_traits::ToPrimitive;
            let w = (&case.spec.rect.hi()[i] - &case.spec.rect.lo()[i]).to_f64().unwrap();
            qf * w + 1.0
        };
        let per_b = 2.0 * num_traits::ToPrimitive::to_f64(&case.kappa).unwrap() + 1.0;
        prop_assert!(n <= side(0) * side(1) * per_b * per_b);
    }
}

#[test]
fn tracefree_counts_are_symmetric_in_the_box() {
    // (a1, a2) ↦ (a2, a1) maps a1²-a2² to its negative and keeps a1 a2
    let spec = builtin("tracefree2").unwrap();
    let q = CountQuery::new(64, r(1, 8), Theta::zero(2, 2)).unwrap();
    let res = enumerate_r(&spec, &q).unwrap();
    let mut swapped: Vec<_> = res
        .points
        .iter()
        .map(|p| (vec![p.a[1], p.a[0]], vec![-p.b[0].clone(), p.b[1].clone()]))
        .collect();
    swapped.sort();
    let original: Vec<_> = res.points.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
    assert_eq!(swapped, original);
}
