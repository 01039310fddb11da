use std::f64::consts::PI;

use khintype::counting::{CountQuery, Theta};
use khintype::expsum::{compare_sweep, dirichlet, fejer, kernel_check, majorant, product_integral};
use khintype::manifold::{builtin, zero_map};
use num_rational::BigRational;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_forms_match_the_sums(h in 1u64..40, x in 0.0f64..1.0) {
        let direct_f: f64 = (1 - h as i64..h as i64)
            .map(|j| (h as i64 - j.abs()) as f64 * (2.0 * PI * j as f64 * x).cos())
            .sum();
        let direct_d: f64 = (-(h as i64)..=h as i64).map(|j| (2.0 * PI * j as f64 * x).cos()).sum();
        prop_assert!((fejer(h, x) - direct_f).abs() < 1e-8 * (h * h) as f64);
        prop_assert!((dirichlet(h, x) - direct_d).abs() < 1e-8 * h as f64);
    }

    #[test]
    fn kernel_inequalities_hold_at_random_points(h in 1u64..64, xs in prop::collection::vec(0.0f64..1.0, 1..50)) {
        prop_assert!(kernel_check(h, &xs).unwrap().worst_slack() >= -1e-9);
    }
}

#[test]
fn zero_map_majorant_is_the_lattice_volume() {
    let spec = zero_map(2, 1);
    let mj = majorant(&spec, 100, &r(1, 8), 0.5, 16).unwrap();
    // H = 2: every one of the 5 frequencies integrates to vol K = 1
    assert_eq!(mj.params.h, 2);
    assert!((mj.value - 100.0f64.powi(2) * 5.0 / 2.0).abs() < 1e-9);
}

#[test]
fn grid_doubling_barely_moves_the_majorant() {
    let spec = builtin("tracefree2").unwrap();
    for (q, kappa) in [(256, r(1, 16)), (1024, r(1, 4)), (2048, r(1, 8))] {
        let coarse = majorant(&spec, q, &kappa, 0.1, 32).unwrap().value;
        let fine = majorant(&spec, q, &kappa, 0.1, 64).unwrap().value;
        assert!((coarse - fine).abs() <= 0.05 * fine, "q = {q}: {coarse} vs {fine}");
    }
}

#[test]
fn integrand_is_capped_by_one() {
    let spec = builtin("tracefree2").unwrap();
    for h in [[0, 0], [1, 0], [2, -3], [5, 5]] {
        let v = product_integral(&spec, &h, 6, 16).unwrap();
        assert!(v > 0.0 && v <= 1.0 + 1e-12);
    }
    assert_eq!(product_integral(&spec, &[0, 0], 6, 16).unwrap(), 1.0);
}

#[test]
fn majorant_ignores_theta() {
    let spec = builtin("tracefree2").unwrap();
    let thetas = [
        Theta::zero(2, 2),
        Theta::from_flat(2, 2, vec![r(3, 10), r(7, 10), r(1, 10), r(9, 10)]).unwrap(),
        Theta::from_flat(2, 2, vec![r(1, 2), r(0, 1), r(1, 3), r(0, 1)]).unwrap(),
    ];
    let queries: Vec<CountQuery> = thetas
        .iter()
        .map(|t| CountQuery::new(512, r(1, 8), t.clone()).unwrap())
        .collect();
    let table = compare_sweep(&spec, &queries, 0.1, 16).unwrap();
    let values: Vec<f64> = table.rows.iter().map(|row| row.majorant.as_ref().unwrap().value).collect();
    assert!(values.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(table.rows.iter().map(|row| row.theta_id).collect::<Vec<_>>(), vec![0, 1, 2]);
}
