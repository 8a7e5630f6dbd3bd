//! Deterministic CSV/JSON emission: fixed 17-significant-digit float
//! formatting so identical configurations produce byte-identical files.

use eop::C64;
use serde_json::Value;

/// 17 significant digits (1 before the point, 16 after), round-trip safe.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number, with a string fallback for exponents beyond +-300 and
/// non-finite values (guard only; nothing in range produces them).
pub fn json_num(x: f64) -> Value {
    if !x.is_finite() || (x != 0.0 && x.abs().log10().abs() > 300.0) {
        return Value::String(fmt_f64(x));
    }
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_f64(x)),
    }
}

pub fn json_complex(z: C64) -> Value {
    Value::Array(vec![json_num(z.re), json_num(z.im)])
}

/// Write a CSV table with a header row.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
