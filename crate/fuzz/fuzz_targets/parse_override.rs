#![no_main]

use libfuzzer_sys::fuzz_target;
use scc_core::experiment::parse_override;

fuzz_target!(|text: &str| {
    if let Ok((key, value)) = parse_override(text) {
        assert!(!key.is_empty() && !value.is_empty());
        let again = parse_override(&format!("{key}={value}")).unwrap();
        assert_eq!(again, (key, value));
    }
});
