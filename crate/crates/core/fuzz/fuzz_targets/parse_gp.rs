#![no_main]

use libfuzzer_sys::fuzz_target;
use soncbound::gpsolve::{dump_gp, parse_gp};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(gp) = parse_gp(text) {
        let dumped = dump_gp(&gp);
        let again = parse_gp(&dumped).expect("dumped program must parse");
        assert_eq!(gp, again);
    }
});
