#![no_main]

use libfuzzer_sys::fuzz_target;
use soncbound::parse_polynomial;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let nvars = usize::from(n % 6) + 1;
    if let Ok(f) = parse_polynomial(text, nvars) {
        // printing and reparsing is the identity on canonical form
        let printed = f.to_string();
        let again = parse_polynomial(&printed, nvars).expect("printed form must parse");
        assert_eq!(f, again, "round trip through {printed:?}");
    }
});
