#![no_main]

use libfuzzer_sys::fuzz_target;
use chrono::{TimeZone, Utc};
use sckg_core::ingest::serper::parse_response;

fuzz_target!(|data: &str| {
    let at = Utc.with_ymd_and_hms(2024, 5, 6, 8, 0, 0).unwrap();
    if let Ok(hits) = parse_response(data, at) {
        for (i, h) in hits.iter().enumerate() {
            assert_eq!(h.rank as usize, i + 1);
        }
    }
});
