//! Acceptance gate: runs criteria 1–9 on the shipped scenarios and prints one
//! line per criterion. Exits non-zero if any criterion fails.

use std::path::Path;
use std::process::ExitCode;

use conelab::verify::{load_suite, run_criterion};

fn main() -> ExitCode {
    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/suite.toml");
    let entries = match load_suite(&suite) {
        Ok(e) => e,
        Err(e) => {
            println!("acceptance: cannot load suite: {e}");
            return ExitCode::FAILURE;
        }
    };
    let ids: Vec<u8> = entries.iter().map(|(id, _)| *id).collect();
    assert_eq!(ids, (1..=9).collect::<Vec<u8>>(), "suite must list criteria 1-9 in order");

    let mut failed = 0;
    for (id, scenarios) in &entries {
        match run_criterion(*id, scenarios) {
            Ok(r) => {
                println!("{}", r.line());
                failed += usize::from(!r.pass);
            }
            Err(e) => {
                println!("criterion {id} [FAIL] error: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", entries.len() - failed, entries.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
