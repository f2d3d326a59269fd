#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::credibility::extract_domain;

fuzz_target!(|data: &str| {
    if let Ok(d) = extract_domain(data) {
        assert!(!d.is_empty());
        assert_eq!(d, d.to_lowercase());
    }
});
