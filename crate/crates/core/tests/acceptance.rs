//! Acceptance checklist: every verification criterion at its stated
//! tolerance, one pass/fail line each.
//!
//! Run with `cargo test -p kscube --test acceptance -- --nocapture` to see
//! the lines; each criterion also asserts its verdict.

use kscube::repro::{self, CriterionRow, RunConfig};

fn check(row: CriterionRow) {
    println!(
        "criterion {:<32} {} ({} ms)",
        row.id,
        if row.pass { "PASS" } else { "FAIL" },
        row.runtime_ms
    );
    assert!(
        row.pass,
        "criterion {} failed: {}\nvalues: {}",
        row.id,
        row.claim,
        serde_json::to_string_pretty(&row.values).unwrap_or_default()
    );
}

fn config() -> RunConfig {
    RunConfig::default()
}

#[test]
fn criterion_01_isoperimetric_exhaustive() {
    check(repro::criterion_isoperimetric(&config()));
}

#[test]
fn criterion_02_sharpness_witness() {
    check(repro::criterion_sharpness_witness(&config()));
}

#[test]
fn criterion_03_random_table_suite() {
    check(repro::criterion_random_tables(&config()));
}

#[test]
fn criterion_04_spectral_identities() {
    check(repro::criterion_spectral_identities(&config()));
}

#[test]
fn criterion_05_even_n_counting_bound() {
    check(repro::criterion_counting_bound(&config()));
}

#[test]
fn criterion_06_permutation_variant_failure() {
    check(repro::criterion_permutation_failure(&config()));
}

#[test]
fn criterion_07_odd_n_degeneracy() {
    check(repro::criterion_odd_degeneracy(&config()));
}

#[test]
fn criterion_08_cut_cone_lp_suite() {
    check(repro::criterion_lp_suite(&config()));
}

#[test]
fn criterion_09_lower_upper_sandwich() {
    check(repro::criterion_sandwich(&config()));
}

#[test]
fn criterion_10_embeddings() {
    check(repro::criterion_embeddings(&config()));
}

#[test]
fn criterion_11_p_gt_2_counterexample() {
    check(repro::criterion_p_gt_2(&config()));
}

/// Regression anchor recorded from the first exact solve: the 16-point
/// Pythagorean square closes at (1 + sqrt 2) / 2.
#[test]
fn pythagorean_square_distortion_anchor() {
    use kscube::cutcone::c1_distortion;
    use kscube::metric::materialize_space;
    use kscube::space::PqParams;

    let params = PqParams::new(1.0, 2.0).unwrap();
    let space = materialize_space(2, &params, 16).unwrap();
    let cert = c1_distortion(&space).unwrap();
    let anchor = (1.0 + 2f64.sqrt()) / 2.0;
    println!(
        "anchor c_1(l_2^2(F_2^2)) = {:.13} (expected {:.13})",
        cert.upper, anchor
    );
    assert!(
        (cert.upper - anchor).abs() <= 1e-6,
        "upper {} drifted from anchor {anchor}",
        cert.upper
    );
    assert!((cert.lower - anchor).abs() <= 1e-6);
}

/// Determinism contract of the driver: verdicts are reproducible across
/// seeds (interval widths may differ) and thread counts.
#[test]
fn repro_driver_fast_rows_deterministic() {
    let a = repro::criterion_sandwich(&RunConfig { seed: 1, threads: 1 });
    let b = repro::criterion_sandwich(&RunConfig { seed: 99, threads: 1 });
    assert_eq!(a.pass, b.pass);
    assert_eq!(a.values, b.values);
}
