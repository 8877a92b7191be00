#![no_main]

use libfuzzer_sys::fuzz_target;
use semisparse_cli::config::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pairs) = parse_config(text) {
            for (key, value) in pairs {
                assert!(!key.is_empty() && !value.is_empty());
                assert!(!key.contains('-'));
            }
        }
    }
});
