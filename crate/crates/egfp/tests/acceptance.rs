//! Runs every acceptance criterion at full size and prints one line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use egfp::oracle::Tolerances;
use egfp::suites::{self, Outcome, DEFAULT_SEEDS};

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let mut outcomes: Vec<Outcome> = Vec::new();
    let mut timed = |run: &mut dyn FnMut() -> Vec<Outcome>| {
        let start = Instant::now();
        let batch = run();
        let secs = start.elapsed().as_secs_f64();
        for o in batch {
            println!("{o} ({secs:.1}s)");
            outcomes.push(o);
        }
    };
    timed(&mut || vec![suites::golden_fixtures(&tol)]);
    timed(&mut || vec![suites::spectra(200, 20, DEFAULT_SEEDS[1], &tol)]);
    timed(&mut || {
        let (band, free) = suites::structural(5, 2, 97, DEFAULT_SEEDS[2]);
        vec![band, free]
    });
    timed(&mut || vec![suites::recovery_suite(1000, DEFAULT_SEEDS[4], &tol)]);
    timed(&mut || vec![suites::rational_suite(100, DEFAULT_SEEDS[5], &tol)]);
    timed(&mut || vec![suites::minimal_suite(20, 4, DEFAULT_SEEDS[6], &tol)]);
    timed(&mut || vec![suites::tuple_algebra(5, 6, DEFAULT_SEEDS[7])]);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
