//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed:
//! `cargo test -p homogenizer --test acceptance`.

use std::process::ExitCode;

use homogenizer::selftest;

fn main() -> ExitCode {
    // Sequential on purpose: each check is judged against its own time budget.
    let outcomes = selftest::run_all();
    for outcome in &outcomes {
        println!("{outcome}");
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
