#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = ebt_core::io::parse_config(text) {
            if config.validate().is_ok() {
                let _ = config.to_problem(std::path::Path::new("."));
            }
        }
    }
});
