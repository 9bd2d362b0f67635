#![no_main]

use critnls::RawConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(raw) = RawConfig::parse_json(text) {
        let _ = raw.resolve();
    }
});
