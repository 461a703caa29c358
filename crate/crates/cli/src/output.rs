//! Deterministic JSON and CSV emission with 12 significant digits.

use std::io::Write;
use std::path::Path;

use robinlap::report::{round12, sig12};
use serde::Serialize;
use serde_json::Value;

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&round_floats(v)).expect("values serialize");
    s.push('\n');
    s
}

/// CSV with a header row; floats use 12 significant digits.
pub fn to_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(&r.iter().map(|x| sig12(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_rounded() {
        #[derive(Serialize)]
        struct R {
            x: f64,
            xs: Vec<f64>,
            n: usize,
        }
        let s = to_json(&R { x: std::f64::consts::PI, xs: vec![1.0 / 3.0], n: 7 });
        assert!(s.contains("3.14159265359"), "{s}");
        assert!(s.contains("0.333333333333"), "{s}");
        assert!(!s.contains("3.141592653589"), "{s}");
        assert!(s.contains("\"n\": 7"), "{s}");
    }

    #[test]
    fn csv_layout() {
        let s = to_csv("a,b", &[vec![1.0, -0.5]]);
        assert_eq!(s, "a,b\n1.00000000000e0,-5.00000000000e-1\n");
    }
}
