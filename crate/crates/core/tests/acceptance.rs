//! Prints one line per acceptance criterion and fails if any does not hold.

use std::process::ExitCode;
use std::time::Instant;

use vbcast_core::verify::{Verifier, CRITERIA};

fn main() -> ExitCode {
    let mut v = Verifier::default();
    let mut failed = 0;
    for id in 1..=CRITERIA {
        let start = Instant::now();
        let outcome = v.run(id);
        println!("{outcome} ({:.1}s)", start.elapsed().as_secs_f64());
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {CRITERIA} criteria passed", CRITERIA - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
