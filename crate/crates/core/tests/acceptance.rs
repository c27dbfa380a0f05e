//! Prints one PASS/FAIL line per acceptance criterion; `ZORN_SLOW=1` adds the
//! exhaustive derived-subloop job.

use std::process::ExitCode;

use zorn_core::acceptance::run_all;

fn main() -> ExitCode {
    let slow = std::env::var("ZORN_SLOW").is_ok_and(|v| v == "1");
    let reports = run_all(slow);
    for report in &reports {
        println!("{report}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
