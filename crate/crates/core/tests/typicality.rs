use khintype::nondegen::{check_surjective, Verdict};
use khintype::symspace::middle_eigenvalue;
use khintype::typicality::{
    construct, dim_s_check, find_zero_middle_eig, membership_u, membership_utilde, phase_cell, rank_one_in_span,
    sample_operator, Regime,
};

#[test]
fn sampling_is_reproducible() {
    assert_eq!(sample_operator(3, 2, 11).unwrap(), sample_operator(3, 2, 11).unwrap());
    assert_ne!(sample_operator(3, 2, 11).unwrap(), sample_operator(3, 2, 12).unwrap());
}

#[test]
fn middle_eigenvalue_has_a_zero_on_the_circle() {
    for seed in 0..10 {
        let a = sample_operator(3, 2, seed).unwrap();
        assert!(check_surjective(&a.pencil).0);
        let z = find_zero_middle_eig(&a).unwrap();
        assert!(z.gamma.abs() <= 1e-8);
        let g = a.pencil.contract(&z.t).unwrap();
        assert!(middle_eigenvalue(&g).unwrap().abs() <= 1e-8);
        // so no operator in this cell can be in Ũ
        assert_eq!(membership_utilde(&a, 20_000).unwrap().verdict, Verdict::Fail);
    }
}

#[test]
fn image_of_v2_minus_w2_has_dimension_2d_minus_1() {
    for d in 2..=4 {
        assert_eq!(dim_s_check(d, 5).unwrap(), 2 * d - 1);
    }
}

#[test]
fn constructions_land_where_expected() {
    let shear = construct("shear", 3, 2).unwrap();
    assert_eq!(membership_u(&shear, 20_000).unwrap().verdict, Verdict::Pass);
    assert_eq!(membership_utilde(&shear, 20_000).unwrap().verdict, Verdict::Fail);
    let diag = construct("diag-squares", 3, 2).unwrap();
    assert_eq!(membership_u(&diag, 20_000).unwrap().verdict, Verdict::Fail);
    assert!(rank_one_in_span(&diag, 20_000).unwrap().found);
    let tf = construct("tracefree-basis", 3, 0).unwrap();
    assert_eq!(membership_u(&tf, 200_000).unwrap().verdict, Verdict::Pass);
    assert!(construct("nope", 3, 2).is_err());
}

#[test]
fn small_cells_match_the_predicted_regimes() {
    let full = phase_cell(2, 1, 100, None, 3).unwrap();
    assert_eq!(full.predicted_u, Regime::DenseConull);
    assert_eq!(full.freq_u, 1.0);
    assert!(full.agree);
    let empty = phase_cell(2, 3, 100, None, 3).unwrap();
    assert_eq!(empty.freq_u, 0.0);
    assert_eq!(empty.implication_violations, 0);
    // deterministic for a fixed seed
    let again = phase_cell(2, 3, 100, None, 3).unwrap();
    assert_eq!(serde_json::to_string(&empty).unwrap(), serde_json::to_string(&again).unwrap());
}
