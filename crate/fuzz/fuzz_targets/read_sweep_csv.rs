#![no_main]

use libfuzzer_sys::fuzz_target;
use scc_core::experiment::read_sweep_csv;

// Writing is a fixed point after one read.
fuzz_target!(|text: &str| {
    let Ok(table) = read_sweep_csv(text) else {
        return;
    };
    let Ok(written) = table.to_csv() else {
        return;
    };
    let again = read_sweep_csv(&written).expect("own output parses");
    assert_eq!(again.to_csv().unwrap(), written);
});
