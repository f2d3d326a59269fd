#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::credibility::{extract_domain_with, PublicSuffixList};

fuzz_target!(|data: &str| {
    let (list, url) = data.split_once('\0').unwrap_or((data, "https://www.example.com/"));
    if let Ok(psl) = PublicSuffixList::parse(list) {
        let _ = extract_domain_with(url, &psl);
    }
});
