//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Checks listed as expected failures are printed red but do not fail the
//! target, unless it is run with `--include-ignored` or `--ignored`.
//! Set PLAP_SUITE=full for the larger suite.

use plap::config::Suite;
use plap::verify::{run_criteria, summary_line, thread_count, CRITERIA, DEFAULT_SEED};
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        // no libtest-style tests to list
        return ExitCode::SUCCESS;
    }
    let strict = args.iter().any(|a| a == "--include-ignored" || a == "--ignored");
    let suite = match std::env::var("PLAP_SUITE").as_deref() {
        Ok("full") => Suite::Full,
        _ => Suite::Quick,
    };
    let ids: Vec<u32> = CRITERIA.iter().map(|c| c.0).collect();
    let start = Instant::now();
    let reports = run_criteria(&ids, suite, DEFAULT_SEED, thread_count());
    let mut bad = 0;
    let mut known = 0;
    println!("\nacceptance ({} suite)", suite.tag());
    for r in &reports {
        println!("{}", summary_line(r));
        if !r.pass {
            if r.only_expected_failures() && !strict {
                known += 1;
            } else {
                bad += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let limit = if suite == Suite::Full { 1800.0 } else { 300.0 };
    let slow = secs > limit;
    println!(
        "\n{} passed, {} failed with only known-false checks, {} failed; {:.1} s (limit {limit} s)",
        reports.iter().filter(|r| r.pass).count(),
        known,
        bad,
        secs
    );
    if bad > 0 || slow {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
