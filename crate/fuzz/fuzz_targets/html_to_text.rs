#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::ingest::html_to_text;

fuzz_target!(|data: &str| {
    let text = html_to_text(data);
    assert!(!text.contains("<script"));
});
