#![no_main]

use libfuzzer_sys::fuzz_target;

// Anything that parses must survive its canonical form unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(s) = bestprox::parse_scenario(text) else { return };
    let canonical = s.to_canonical_json();
    let again = bestprox::parse_scenario(&canonical).expect("canonical form parses");
    assert_eq!(again, s);
    assert_eq!(again.to_canonical_json(), canonical);
});
