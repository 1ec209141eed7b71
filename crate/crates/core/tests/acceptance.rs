//! One test per acceptance criterion. Each prints a PASS/FAIL line followed
//! by the individual checks, then asserts the criterion.

use tn_core::verify::{run_criterion, VerifyOptions};

fn criterion(id: u8) {
    let result = run_criterion(id, &VerifyOptions::default()).expect("known criterion");
    println!("{result}");
    assert!(result.pass(), "criterion {id} failed:\n{result}");
}

#[test]
fn criterion_01_scalar_flatness() {
    criterion(1);
}

#[test]
fn criterion_02_ricci_structure() {
    criterion(2);
}

#[test]
fn criterion_03_closed_form_vs_oracle() {
    criterion(3);
}

#[test]
fn criterion_04_conformal_flatness() {
    criterion(4);
}

#[test]
fn criterion_05_local_symmetry() {
    criterion(5);
}

#[test]
fn criterion_06_geodesic_correspondence() {
    criterion(6);
}

#[test]
fn criterion_07_monge_ampere_minimality() {
    criterion(7);
}

#[test]
fn criterion_08_hamiltonian_minimality() {
    criterion(8);
}

#[test]
fn criterion_09_totally_geodesic_quadratics() {
    criterion(9);
}

#[test]
fn criterion_10_functionally_related_flatness() {
    criterion(10);
}

#[test]
fn criterion_11_line_space_embedding() {
    criterion(11);
}

#[test]
fn criterion_12_kahler_isometry() {
    criterion(12);
}

#[test]
fn criterion_13_structure_algebra() {
    criterion(13);
}

#[test]
fn criterion_14_maslov_identity() {
    criterion(14);
}

#[test]
fn criterion_15_null_lifts() {
    criterion(15);
}
