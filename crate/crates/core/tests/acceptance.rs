//! Runs every acceptance criterion and prints one line per criterion. Uses its
//! own harness so the report is shown on every run, not only on failure.

use std::process::ExitCode;

use hermkr::checks;

fn main() -> ExitCode {
    let records = checks::run_all(checks::DEFAULT_SEED);
    for r in &records {
        println!("{}", checks::render_line(r));
    }
    let passed = records.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/{} criteria passed", records.len());
    if passed == records.len() && records.len() == 10 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
