use ell0_core::selftest;

fn check(id: u32) {
    let outcome = selftest::run(id).expect("known check");
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn c01_three_minimizer_reproduction() {
    check(1);
}

#[test]
fn c02_tolerance_mode_hyperplane_entry() {
    check(2);
}

#[test]
fn c03_oracle_agreement() {
    check(3);
}

#[test]
fn c04_descent_inequality() {
    check(4);
}

#[test]
fn c05_rate_bound() {
    check(5);
}

#[test]
fn c06_weight_sum_gerstewitz_equivalence() {
    check(6);
}

#[test]
fn c07_max_scalarizer() {
    check(7);
}

#[test]
fn c08_gerstewitz_properties() {
    check(8);
}

#[test]
fn c09_subgradient_rate() {
    check(9);
}

#[test]
fn c10_pareto_falsifier() {
    check(10);
}

#[test]
fn every_check_is_covered() {
    assert_eq!(selftest::CHECKS.len(), 10);
}
