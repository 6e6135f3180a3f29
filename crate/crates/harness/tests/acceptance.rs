//! Runs every acceptance criterion and prints one line per criterion.
//! `HBSIM_LARGE=1` adds the n = 10^4 runs.

use std::process::ExitCode;

use hbsim_harness::acceptance::{Acceptance, AcceptanceOptions};

fn main() -> ExitCode {
    // `cargo test` passes libtest flags; bare numbers select criterion ids
    let mut only: Vec<u8> = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if matches!(
            a.as_str(),
            "--test-threads" | "--skip" | "--format" | "--color" | "--logfile" | "-Z"
        ) {
            args.next();
        } else if let Ok(id) = a.parse() {
            only.push(id);
        }
    }
    let mut opts = AcceptanceOptions::from_env();
    opts.only = only;
    let mut suite = match Acceptance::new(opts) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("acceptance: {e}");
            return ExitCode::FAILURE;
        }
    };
    let results = suite.run(|r| println!("{r}"));
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
