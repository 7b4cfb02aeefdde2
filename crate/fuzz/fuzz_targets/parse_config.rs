#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = crg_core::experiment::parse_config(text) {
            // anything accepted must echo back to the same config
            let echoed = crg_core::experiment::parse_config(&cfg.to_json().to_string())
                .expect("echo parses");
            assert_eq!(echoed.scenario, cfg.scenario);
            assert_eq!(echoed.sweep, cfg.sweep);
        }
    }
});
