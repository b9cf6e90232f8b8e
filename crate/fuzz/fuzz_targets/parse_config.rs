#![no_main]

use libfuzzer_sys::fuzz_target;
use scc_core::experiment::{parse_config, ExperimentConfig};

fuzz_target!(|text: &str| {
    let Ok(pairs) = parse_config(text) else {
        return;
    };
    let rendered: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    assert_eq!(parse_config(&rendered).unwrap(), pairs);
    let _ = ExperimentConfig::from_pairs(&pairs);
});
