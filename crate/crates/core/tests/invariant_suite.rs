//! Runs the full registered invariant suite, the same battery behind
//! `diskflow check`.

use diskflow::invariants;

#[test]
fn every_registered_invariant_passes() {
    let mut failures = Vec::new();
    for check in invariants::all() {
        let report = check.run();
        println!(
            "{} {} measured={:.3e} threshold={:.3e}{}",
            if report.pass { "PASS" } else { "FAIL" },
            report.name,
            report.measured,
            report.threshold,
            report
                .note
                .as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        );
        if !report.pass {
            failures.push(report.name);
        }
    }
    assert!(failures.is_empty(), "failing invariants: {failures:?}");
}
