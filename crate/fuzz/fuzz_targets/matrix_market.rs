#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| egfp_fuzz::matrix_market(data));
