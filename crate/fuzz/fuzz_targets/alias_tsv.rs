#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::resolve::{AliasTable, NameNormalizer, DEFAULT_LEGAL_SUFFIXES};

fuzz_target!(|data: &str| {
    let normalizer = NameNormalizer::new(DEFAULT_LEGAL_SUFFIXES.iter().copied());
    let _ = AliasTable::from_tsv_str(data, &normalizer);
});
