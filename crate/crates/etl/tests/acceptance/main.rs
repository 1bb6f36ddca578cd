//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../common/mod.rs"]
mod common;

/// Fails the enclosing criterion with a formatted message.
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

mod algebra;
mod golden;
mod scale;
mod scd;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

/// A criterion returns a short detail line on success.
pub type Outcome = Result<String, String>;

type Check = fn() -> Outcome;

const CRITERIA: [(u8, &str, Check); 9] = [
    (1, "golden end-to-end flows", golden::end_to_end),
    (2, "flow generation for sdw:Recipient", golden::flow_generation),
    (3, "query algebra against exhaustive oracle", algebra::query_oracle),
    (4, "slowly changing dimension updates", scd::suite),
    (5, "changed data capture against set difference", algebra::cdc_oracle),
    (6, "TBox extraction from synthetic ABoxes", algebra::tbox_extraction),
    (7, "inference closure against naive fixpoint", algebra::inference_closure),
    (8, "LevelMemberGenerator scales linearly", scale::level_member_scaling),
    (9, "byte-identical store across runs", golden::determinism),
];

fn main() -> ExitCode {
    let filter: Option<u8> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, name, check) in CRITERIA {
        if filter.is_some_and(|f| f != n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into());
                Err(msg)
            });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {n} {name}: {detail} ({secs:.2} s)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {n} {name}: {why} ({secs:.2} s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
