//! Acceptance gate: runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use mhd_rt::verify::{run_criterion, SuiteConfig, CRITERION_COUNT};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut failed = 0;
    for id in 1..=CRITERION_COUNT {
        let start = Instant::now();
        let outcome = run_criterion(id, &cfg);
        println!("{outcome} ({:.1}s)", start.elapsed().as_secs_f64());
        if !outcome.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        CRITERION_COUNT - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
