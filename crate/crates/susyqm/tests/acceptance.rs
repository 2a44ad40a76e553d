//! End-to-end acceptance gate. Each test drives one reproduction case
//! through the public pipeline and prints its pass/fail lines; the
//! numeric bounds live in the case definitions and are not adjustable
//! from here. Run with `--nocapture` to see every check line.

use std::time::Instant;

use susyqm::repro::{run_case, CaseId, RunOverrides};

fn drive(id: CaseId) -> susyqm::repro::CaseOutcome {
    let outcome = run_case(id, &RunOverrides::default())
        .unwrap_or_else(|e| panic!("{} failed to run: {e}", id.name()));
    println!("[{}]\n{}", id.name(), outcome.report());
    outcome
}

#[test]
fn criterion_01_two_new_levels_below_the_ground_state() {
    let start = Instant::now();
    let outcome = drive(CaseId::Fig1);
    assert!(outcome.passed(), "{}", outcome.report());
    let elapsed = start.elapsed().as_secs_f64();
    println!("runtime: {elapsed:.2} s (budget 10 s)");
    assert!(elapsed < 10.0, "case took {elapsed:.2} s, budget is 10 s");
}

#[test]
fn criterion_02_two_new_levels_inside_a_gap() {
    let outcome = drive(CaseId::Fig2);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_03_single_embedded_level() {
    let outcome = drive(CaseId::Fig3);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_04_isospectral_bound_state_seed() {
    let outcome = drive(CaseId::Fig4);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_05_complex_energy_real_potential() {
    let outcome = drive(CaseId::Fig5);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_06_chain_matches_direct_second_order() {
    let outcome = drive(CaseId::Equiv);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_07_first_order_and_confluent_coincide() {
    let outcome = drive(CaseId::Am);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_08_intertwining_residuals_stay_small() {
    let outcome = drive(CaseId::Intertwining);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_09_ladder_algebra_both_depths() {
    let k1 = drive(CaseId::LadderK1);
    assert!(k1.passed(), "{}", k1.report());
    let k2 = drive(CaseId::LadderK2);
    assert!(k2.passed(), "{}", k2.report());
}

#[test]
fn criterion_10_coherent_state_suite() {
    let outcome = drive(CaseId::Cs);
    assert!(outcome.passed(), "{}", outcome.report());
}

#[test]
fn criterion_11_uncertainty_closed_forms() {
    let outcome = drive(CaseId::Uncertainty);
    assert!(outcome.passed(), "{}", outcome.report());
}
