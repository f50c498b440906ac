//! Acceptance gate: one test per shipped criterion, run against the same
//! checkers the `verify` subcommand uses. Each test prints a single
//! PASS/FAIL line (visible with `--nocapture`; the test name itself serves
//! as the per-criterion line in default cargo output) and enforces the
//! criterion's runtime budget where one is declared.

use synchrony_lab::verify::{run_criterion, VerifyOptions};

fn run(index: usize, budget_ms: Option<u64>) {
    let opts = VerifyOptions::default();
    let r = run_criterion(index, &opts);
    let status = if r.pass { "PASS" } else { "FAIL" };
    println!("[{}] {} {} ({} ms): {}", r.index, r.name, status, r.elapsed_ms, r.detail);
    assert!(r.pass, "criterion {} ({}) failed: {}", r.index, r.name, r.detail);
    if let Some(budget) = budget_ms {
        assert!(
            r.elapsed_ms < budget,
            "criterion {} ({}) took {} ms, budget {} ms",
            r.index,
            r.name,
            r.elapsed_ms,
            budget
        );
    }
}

#[test]
fn criterion_1_classification_table() {
    run(1, Some(10_000));
}

#[test]
fn criterion_2_quarter_turn_point() {
    run(2, Some(1_000));
}

#[test]
fn criterion_3_signature_bounds_fuzz() {
    run(3, Some(30_000));
}

#[test]
fn criterion_4_exotic_census() {
    run(4, Some(120_000));
}

#[test]
fn criterion_5_automorphism_groups() {
    run(5, Some(5_000));
}

#[test]
fn criterion_6_laplacian_map_identities() {
    run(6, None);
}

#[test]
fn criterion_7_chart_census() {
    run(7, Some(30_000));
}

#[test]
fn criterion_8_sync_funnel() {
    run(8, Some(60_000));
}

#[test]
fn criterion_9_balance_equivalence() {
    run(9, Some(5_000));
}
