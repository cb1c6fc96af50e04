#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = ebt_core::io::parse_measure_csv(text) {
            let again = ebt_core::io::parse_measure_csv(&ebt_core::io::measure_csv(&m)).expect("round trip");
            assert_eq!(again, m);
        }
    }
});
