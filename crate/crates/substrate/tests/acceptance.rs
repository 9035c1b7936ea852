//! Runs the acceptance criteria and prints one line per criterion.

use std::process::ExitCode;

use substrate::cli::verify::run_suite;

fn main() -> ExitCode {
    let report = match run_suite(None, None) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance suite could not run: {}: {}", e.reason(), e.message());
            return ExitCode::FAILURE;
        }
    };
    for o in &report.outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {verdict} {} ({:.2?})", o.id, o.name, o.elapsed);
        if !o.passed {
            println!("    {}", o.detail);
        }
    }
    let passed = report.outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", report.outcomes.len());
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
