//! The acceptance suite: one test per criterion, each printing its
//! pass/fail line (run with `--nocapture` to see them as they complete).
//!
//! ```text
//! cargo test -p cyclocap-cli --test acceptance -- --nocapture
//! ```

use cyclocap_cli::acceptance::run_criterion;
use std::path::PathBuf;

const SUITE_SEED: u64 = 1;

fn run(id: u32) {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance_{id}"));
    let result = run_criterion(id, &out, SUITE_SEED).expect("criterion must run to completion");
    println!("{}", result.line());
    for d in &result.details {
        println!("    {d}");
    }
    assert!(
        result.passed,
        "criterion {id} failed:\n{}",
        result.details.join("\n")
    );
}

#[test]
fn criterion_01_awgn_sanity() {
    run(1);
}

#[test]
fn criterion_02_oracle_equivalence() {
    run(2);
}

#[test]
fn criterion_03_constancy_and_scaling() {
    run(3);
}

#[test]
fn criterion_04_sequence_reference_ranges() {
    run(4);
}

#[test]
fn criterion_05_ratio_reference_values() {
    run(5);
}

#[test]
fn criterion_06_power_sensitivity() {
    run(6);
}

#[test]
fn criterion_07_density_mean_identity() {
    run(7);
}

#[test]
fn criterion_08_concentration_rate() {
    run(8);
}

#[test]
fn criterion_09_charfn_agreement() {
    run(9);
}

#[test]
fn criterion_10_limit_interchange() {
    run(10);
}

#[test]
fn criterion_11_determinism() {
    run(11);
}
