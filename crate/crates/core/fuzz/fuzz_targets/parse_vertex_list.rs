#![no_main]

use libfuzzer_sys::fuzz_target;
use soncbound::geometry::{lattice_points_capped, parse_vertex_list};
use soncbound::maximal_mediated_set;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(vertices) = parse_vertex_list(text) else {
        return;
    };
    if vertices.iter().any(|v| v.iter().any(|&c| c > 12)) || vertices.len() > 4 {
        return;
    }
    if let Ok(ms) = maximal_mediated_set(&vertices) {
        for v in &vertices {
            assert!(ms.contains(v));
        }
        let all = lattice_points_capped(&vertices, 1 << 16).expect("small simplex");
        assert_eq!(ms.is_h_simplex, ms.pstar.len() == all.len());
    }
});
