#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::ingest::robots::RobotsRules;

fuzz_target!(|data: &str| {
    let (agent, body) = data.split_once('\n').unwrap_or(("sckg", data));
    let rules = RobotsRules::parse(body, agent);
    let _ = rules.is_allowed("/");
    let _ = rules.is_allowed("/a/b?c=d");
});
