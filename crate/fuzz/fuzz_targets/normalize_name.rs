#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::resolve::normalize_name;

fuzz_target!(|data: &str| {
    if let Ok(n) = normalize_name(data) {
        let again = normalize_name(&n.text).expect("normalized form re-normalizes");
        assert_eq!(again.text, n.text);
    }
});
