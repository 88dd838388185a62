use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn soncbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soncbound"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn text_value(out: &Output, key: &str) -> String {
    let stdout = String::from_utf8_lossy(&out.stdout);
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{stdout}"))
        .to_string()
}

#[test]
fn bound_json_example_one() {
    let ex1 = fixture("ex1.poly");
    let out = soncbound(&["bound", ex1.to_str().unwrap(), "--nvars", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let f_gp = v["f_gp"].as_f64().unwrap();
    assert!((f_gp + 3.75).abs() < 1e-6, "{f_gp}");
    assert_eq!(v["status"], "optimal");
    let a = &v["a_star"][0];
    assert_eq!(a["alpha"], serde_json::json!([3, 3]));
    for x in a["a"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 1.0).abs() < 1e-4);
    }
}

#[test]
fn text_and_json_agree() {
    let ex2 = fixture("ex2.poly");
    let p = ex2.to_str().unwrap();
    let text = soncbound(&["bound", p]);
    let json = soncbound(&["bound", p, "--format", "json"]);
    let v = json_of(&json);
    for key in ["f_gp", "m_star"] {
        let t: f64 = text_value(&text, key).parse().unwrap();
        assert_eq!(t, v[key].as_f64().unwrap(), "{key}");
    }
}

#[test]
fn empty_delta_without_nvars() {
    let out = soncbound(&["bound", fixture("empty_delta.poly").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text_value(&out, "f_gp"), "1");
}

#[test]
fn mediated_figure_one() {
    let out = soncbound(&["mediated", "--vertices", "0,0;6,0;0,6", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["h_simplex"], true);
    assert_eq!(v["size"], 28);
    assert_eq!(v["pstar"].as_array().unwrap().len(), 28);
}

#[test]
fn mediated_motzkin_simplex_is_not_h() {
    let out = soncbound(&["mediated", "--vertices", "0,0;4,2;2,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text_value(&out, "h_simplex"), "false");
    assert!(!text_value(&out, "pstar").contains("(2,2)"));
}

#[test]
fn certify_emits_schema() {
    let ex3 = fixture("ex3.poly");
    let out = soncbound(&["certify", ex3.to_str().unwrap(), "--format", "json", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verified"], true);
    let cert = &v["certificate"];
    let circuits = cert["circuits"].as_array().unwrap();
    assert_eq!(circuits.len(), 2);
    for c in circuits {
        for key in ["vertices", "vertex_coeffs", "beta", "c", "theta", "status"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
    assert!(cert["remainder"].is_array());
    assert!((cert["r"].as_f64().unwrap() + 5.794).abs() < 5e-3);
    assert_eq!(v["classification"].as_array().unwrap().len(), 2);

    // the emitted certificate decodes and verifies against f
    let f = soncbound::parse_polynomial(&std::fs::read_to_string(&ex3).unwrap(), 2).unwrap();
    let decoded = soncbound::SoncCertificate::from_json_str(&cert.to_string()).unwrap();
    decoded.verify(&f).unwrap();
}

#[test]
fn motzkin_circuit_is_sonc_only() {
    let m = fixture("motzkin.poly");
    let out = soncbound(&["certify", m.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["classification"][0]["class"], "sonc_only");
    assert_eq!(v["classification"][0]["status"], "nonneg-circuit");
    assert!(v["f_gp"].as_f64().unwrap().abs() < 1e-7);
}

#[test]
fn exit_codes() {
    let bad = soncbound(&["bound", fixture("bad.poly").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    let missing = soncbound(&["bound", "/nonexistent/input.poly"]);
    assert_eq!(missing.status.code(), Some(2));
    let range = soncbound(&["bound", fixture("ex1.poly").to_str().unwrap(), "--nvars", "1"]);
    assert_eq!(range.status.code(), Some(2));
    let hull = soncbound(&["bound", fixture("not_simplex.poly").to_str().unwrap()]);
    assert_eq!(hull.status.code(), Some(3));
    let odd = soncbound(&["mediated", "--vertices", "0,0;3,0;0,2"]);
    assert_eq!(odd.status.code(), Some(3));
    let stalled = soncbound(&["bound", fixture("ex3.poly").to_str().unwrap(), "--max-iter", "1"]);
    assert_eq!(stalled.status.code(), Some(4));
    let usage = soncbound(&["bound"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn error_json() {
    let out = soncbound(&[
        "bound",
        fixture("not_simplex.poly").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_of(&out);
    assert_eq!(v["error"], "assumption");
    assert_eq!(v["exit_code"], 3);
    assert!(v["message"].as_str().unwrap().contains("simplex"));

    let out = soncbound(&[
        "bound",
        fixture("ex3.poly").to_str().unwrap(),
        "--max-iter",
        "1",
        "--format",
        "json",
    ]);
    let v = json_of(&out);
    assert_eq!(v["error"], "solver");
    assert_eq!(v["status"], "max_iter");
}

#[test]
fn constrained_half_line() {
    let out = soncbound(&[
        "constrained-bound",
        fixture("f_halfline.poly").to_str().unwrap(),
        "--g",
        fixture("g_halfline.poly").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["class"], "signomial");
    let b = v["bound"].as_f64().unwrap();
    assert!(b <= 2.0 + 1e-6 && b > 2.0 - 1e-5, "{b}");
}

#[test]
fn constrained_without_constraints_matches_bound() {
    let ex1 = fixture("ex1.poly");
    let c = json_of(&soncbound(&["constrained-bound", ex1.to_str().unwrap(), "--format", "json"]));
    let b = json_of(&soncbound(&["bound", ex1.to_str().unwrap(), "--format", "json"]));
    assert_eq!(c["bound"], b["f_gp"]);
}

#[test]
fn oracle_is_seeded() {
    let m = fixture("motzkin.poly");
    let run = || json_of(&soncbound(&["oracle", m.to_str().unwrap(), "--seed", "7", "--format", "json"]));
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a["seed"], 7);
    assert!(a["best_value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn verify_flag_reports() {
    let out = soncbound(&["bound", fixture("ex1.poly").to_str().unwrap(), "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text_value(&out, "verified"), "true");
}
