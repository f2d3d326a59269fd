#![no_main]

use libfuzzer_sys::fuzz_target;
use std::path::Path;

use sckg_core::ingest::parse_targets;

fuzz_target!(|data: &str| {
    if let Ok(targets) = parse_targets(data, Path::new("targets.tsv")) {
        for t in targets {
            assert!(!t.id.is_empty() && !t.name.is_empty());
        }
    }
});
