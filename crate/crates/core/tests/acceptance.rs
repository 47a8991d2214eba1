//! Runs the nine acceptance criteria at full size and prints one line each.

use std::process::ExitCode;

use sensorpath::oracle::DEFAULT_SEED;
use sensorpath::validation::{run_check, Check, Level, Options};

fn main() -> ExitCode {
    let opts = Options::new(Level::Full, DEFAULT_SEED);
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for check in Check::ALL {
        if !only.is_empty() && !only.contains(&check.number()) {
            continue;
        }
        let result = run_check(check, &opts);
        println!("{}", result.line());
        if !result.passed {
            failed += 1;
            for m in result.measurements.iter().filter(|m| !m.passed) {
                println!("    {}: {:.6e} (tol {:.1e})", m.what, m.measured, m.tolerance);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
