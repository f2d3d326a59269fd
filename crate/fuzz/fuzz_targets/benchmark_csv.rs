#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::analytics::BenchmarkGraph;
use sckg_core::resolve::{AliasTable, NameNormalizer, DEFAULT_LEGAL_SUFFIXES};

fuzz_target!(|data: &str| {
    let normalizer = NameNormalizer::new(DEFAULT_LEGAL_SUFFIXES.iter().copied());
    let aliases = AliasTable::default();
    if let Ok(g) = BenchmarkGraph::from_csv_str(data, &normalizer, &aliases) {
        let _ = g.stats();
    }
});
