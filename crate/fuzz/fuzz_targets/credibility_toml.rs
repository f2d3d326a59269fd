#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::credibility::CredibilityConfig;

fuzz_target!(|data: &str| {
    let _ = CredibilityConfig::from_toml_str(data);
});
