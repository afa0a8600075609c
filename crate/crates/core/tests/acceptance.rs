use std::time::Duration;

use spinfield::inference::CheckOptions;
use spinfield::verify::{Suite, SuiteOutcome, DEFAULT_SEED, LEVY_COEFF_TOL, LEVY_REL_TOL, ORTHOGONALITY_TOL, SQRT_TOL, TYPE_S_TOL};

fn run(suite: Suite) -> SuiteOutcome {
    let o = suite.run(DEFAULT_SEED, CheckOptions::default());
    println!("{} criterion {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.criterion, o.line());
    if !o.passed {
        println!("{}", o.details);
    }
    o
}

fn within(o: &SuiteOutcome, secs: u64) {
    assert!(o.elapsed < Duration::from_secs(secs), "{} took {:?}", o.name, o.elapsed);
}

#[test]
fn tolerances_are_pinned() {
    assert_eq!(ORTHOGONALITY_TOL, 1e-10);
    assert_eq!(SQRT_TOL, 1e-9);
    assert_eq!(LEVY_COEFF_TOL, 1e-10);
    assert_eq!(LEVY_REL_TOL, 0.03);
    assert_eq!(TYPE_S_TOL, 1e-10);
    assert_eq!(CheckOptions::default().k_sigma, 3.0);
    assert_eq!(spinfield::bundle::ANGLE_TOL, 1e-9);
    assert_eq!(spinfield::bundle::COCYCLE_TOL, 1e-10);
}

#[test]
fn criterion_1_wigner_orthogonality() {
    let o = run(Suite::WignerOrthogonality);
    assert!(o.passed, "{}", o.line());
    within(&o, 10);
}

#[test]
fn criterion_2_square_root() {
    let o = run(Suite::SquareRoot);
    assert!(o.passed, "{}", o.line());
}

#[test]
fn criterion_3_levy_coefficients() {
    let o = run(Suite::LevyCoefficients);
    assert!(o.passed, "{}", o.line());
}

#[test]
fn criterion_4_levy_distance() {
    let o = run(Suite::LevyDistance);
    assert!(o.passed, "{}", o.line());
    within(&o, 60);
}

#[test]
fn criterion_5_spin_covariance() {
    let o = run(Suite::SpinCovariance);
    assert!(o.passed, "{}", o.line());
}

#[test]
fn criterion_6_coefficient_structure() {
    let o = run(Suite::CoefficientStructure);
    assert!(o.passed, "{}", o.line());
}

#[test]
fn criterion_7_bundle() {
    let o = run(Suite::Bundle);
    assert!(o.passed, "{}", o.line());
    within(&o, 5);
}

#[test]
fn criterion_8_type_s() {
    let o = run(Suite::TypeS);
    assert!(o.passed, "{}", o.line());
}

#[test]
fn criterion_9_isotropy() {
    let o = run(Suite::Isotropy);
    assert!(o.passed, "{}", o.line());
}
