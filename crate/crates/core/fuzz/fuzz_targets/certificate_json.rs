#![no_main]

use libfuzzer_sys::fuzz_target;
use soncbound::{parse_polynomial, SoncCertificate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // an optional first line holds the target polynomial
    let (poly, json) = match text.split_once('\n') {
        Some((p, j)) if !p.trim_start().starts_with('{') => (Some(p), j),
        _ => (None, text),
    };
    let Ok(cert) = SoncCertificate::from_json_str(json) else {
        return;
    };
    let reencoded = cert.to_json_string();
    let back = SoncCertificate::from_json_str(&reencoded).expect("re-encoded certificate must decode");
    assert_eq!(back.circuits.len(), cert.circuits.len());
    if let Some(p) = poly {
        let nvars = cert
            .circuits
            .first()
            .map(|c| c.circuit.beta().len())
            .or_else(|| cert.remainder.first().map(|(e, _)| e.len()))
            .unwrap_or(1)
            .max(1);
        if let Ok(f) = parse_polynomial(p, nvars) {
            let _ = cert.verify(&f);
        }
    }
});
