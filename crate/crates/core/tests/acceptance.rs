//! Runs every registered check at its default tolerance and prints one line per
//! acceptance criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;
use ultraspherical::harness::{run_suite_report, RunConfig, SuiteReport};

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let suite = match run_suite_report(&cfg) {
        Ok(s) => s,
        Err(e) => {
            println!("suite did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &suite.reports {
        println!("    {}", r.summary_line());
    }
    println!();
    let mut ok = true;
    for a in 1..=12 {
        let crit = format!("A{a}");
        let rs: Vec<_> = suite.reports.iter().filter(|r| r.criterion == crit).collect();
        let pass = !rs.is_empty() && rs.iter().all(|r| r.pass);
        let ms: u64 = rs.iter().map(|r| r.runtime_ms).sum();
        let failed: Vec<&str> = rs.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
        let mut line = format!("{crit:<4} {} ({} checks, {ms} ms)", if pass { "PASS" } else { "FAIL" }, rs.len());
        if !failed.is_empty() {
            line.push_str(&format!(" failing: {}", failed.join(", ")));
        }
        println!("{line}");
        ok &= pass;
    }

    // the written report must read back to the same document
    let json = suite.to_json().expect("report serialises");
    let back = SuiteReport::from_json(&json).expect("report parses");
    let same = back.to_json().expect("report serialises") == json;
    println!("report JSON round trip: {}", if same { "PASS" } else { "FAIL" });
    ok &= same;

    println!(
        "{} passed, {} failed, {:.1} s",
        suite.summary.passed,
        suite.summary.failed,
        start.elapsed().as_secs_f64()
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
