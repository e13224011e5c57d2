//! Deterministic output emission.
//!
//! CSV documents follow RFC 4180: a header row, CRLF record terminators,
//! `.` as the decimal separator, and quoting only where the field content
//! requires it. Floats are written with 17 significant digits so a reader
//! recovers the exact binary value; counts and indices are written as plain
//! integers. JSON documents serialize the typed report structs directly, so
//! the key order is the declaration order and stable across runs.

use serde::Serialize;

/// A float with 17 significant digits (sign, one leading digit, 16 decimals,
/// power-of-ten exponent). Non-finite values spell themselves out.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// RFC-4180 field escaping: quote when the content contains a comma, a
/// quote, or a line break, doubling interior quotes.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Assemble a CSV document from a header and pre-formatted rows.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let h: Vec<String> = header.iter().map(|c| field(c)).collect();
    out.push_str(&h.join(","));
    out.push_str("\r\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| field(c)).collect();
        out.push_str(&cells.join(","));
        out.push_str("\r\n");
    }
    out
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_document<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}
