#![no_main]

use cvqkd_cli::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(first) = Scenario::parse(text) else {
        return;
    };
    let dumped = first.dump();
    let second = Scenario::parse(&dumped).expect("dumped scenario parses");
    // NaN fields make equality reflexively false, so compare the dumps.
    assert_eq!(dumped, second.dump());
});
