#![no_main]

use cvqkd_cli::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = Scenario::parse(text) {
            // Building validates every numeric range; it must fail cleanly.
            let _ = s.build();
        }
    }
});
