#![no_main]

use critnls::RawConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(raw) = RawConfig::parse_kv(text) else { return };
    if let Ok(cfg) = raw.resolve() {
        // A resolved config must survive its own canonical echo.
        let again = RawConfig::parse_kv(&cfg.canonical()).and_then(|r| r.resolve()).unwrap();
        assert_eq!(again.canonical(), cfg.canonical());
    }
});
