//! Output rendering. Text and JSON show the same rounded numbers.

use serde_json::{Map, Value};

/// `x` rounded to 10 significant digits.
pub fn sig10(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// Shortest decimal form of `sig10(x)`.
pub fn fmt10(x: f64) -> String {
    let r = sig10(x);
    if r == 0.0 {
        return "0".into();
    }
    let mag = r.abs().log10();
    if (-5.0..15.0).contains(&mag) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// `CamelCase` to `snake_case`.
pub fn snake(s: &str) -> String {
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if ch.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(ch.to_ascii_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

/// Ordered key/value report.
pub struct Report {
    entries: Vec<(String, Value, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report {
            entries: Vec::new(),
        }
    }

    pub fn num(&mut self, key: &str, v: f64) {
        let r = sig10(v);
        let value = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        self.entries.push((key.into(), value, format!("{key}: {}", fmt10(v))));
    }

    pub fn int(&mut self, key: &str, v: u64) {
        self.entries.push((key.into(), Value::from(v), format!("{key}: {v}")));
    }

    pub fn flag(&mut self, key: &str, v: bool) {
        self.entries.push((key.into(), Value::from(v), format!("{key}: {v}")));
    }

    pub fn text(&mut self, key: &str, v: String) {
        let line = format!("{key}: {v}");
        self.entries.push((key.into(), Value::from(v), line));
    }

    /// Structured value; `text` replaces the default one-line rendering.
    pub fn raw(&mut self, key: &str, v: Value, text: Option<String>) {
        let line = text.unwrap_or_else(|| format!("{key}: {v}"));
        self.entries.push((key.into(), v, line));
    }

    pub fn print(&self, json: bool) {
        if json {
            let map: Map<String, Value> = self
                .entries
                .iter()
                .map(|(k, v, _)| (k.clone(), v.clone()))
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&Value::Object(map)).expect("report JSON")
            );
        } else {
            for (_, _, line) in &self.entries {
                println!("{line}");
            }
        }
    }
}
