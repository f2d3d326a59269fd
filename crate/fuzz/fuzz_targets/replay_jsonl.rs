#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::ingest::ReplayClient;

fuzz_target!(|data: &str| {
    let _ = ReplayClient::from_jsonl_str(data);
});
