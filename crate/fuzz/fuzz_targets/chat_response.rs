#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::extract::chat::parse_chat_response;

fuzz_target!(|data: &str| {
    let _ = parse_chat_response(data);
});
