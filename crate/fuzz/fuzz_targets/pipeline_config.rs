#![no_main]

use libfuzzer_sys::fuzz_target;
use std::path::Path;

use sckg_core::pipeline::PipelineConfig;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = PipelineConfig::from_toml_str(data, Path::new("/run")) {
        let _ = cfg.validate();
    }
});
