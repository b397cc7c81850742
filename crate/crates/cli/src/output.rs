//! Documents: JSON values with sorted keys, rendered as JSON, CSV or
//! aligned text. CSV and text flatten nested keys with dots.

use kloosterman_core::exactnum::{Phase, PhaseSum};
use kloosterman_core::sl4::KloostermanResult;
use kloosterman_core::{IntMatrix, RatMatrix};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::args::Format;

/// Value fields are rounded to this many decimal places so that
/// last-bit noise never reaches the output.
pub const VALUE_DIGITS: i32 = 12;

pub fn round_value(x: f64) -> f64 {
    let scale = 10f64.powi(VALUE_DIGITS);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn int_value(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => json!(i),
        None => json!(v.to_string()),
    }
}

fn parse_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// `[[numerator, denominator, multiplicity], …]` in phase order.
pub fn phases_value(s: &PhaseSum) -> Value {
    Value::Array(
        s.iter()
            .map(|(p, k)| json!([int_value(p.numer()), int_value(p.denom()), k]))
            .collect(),
    )
}

/// Inverse of [`phases_value`].
pub fn phases_from_value(v: &Value) -> Option<PhaseSum> {
    let mut out = PhaseSum::new();
    for entry in v.as_array()? {
        let e = entry.as_array()?;
        if e.len() != 3 {
            return None;
        }
        let (num, den, k) = (parse_int(&e[0])?, parse_int(&e[1])?, e[2].as_i64()?);
        if den <= BigInt::from(0) {
            return None;
        }
        out.add_term(Phase::from_fraction(num, den), k);
    }
    Some(out)
}

pub fn result_value(r: &KloostermanResult) -> Value {
    let mut doc = json!({
        "method": r.method.name(),
        "exact_phases": phases_value(&r.exact),
        "value_re": round_value(r.value.re),
        "value_im": round_value(r.value.im),
    });
    if let Some(k) = r.representatives {
        doc["representatives"] = json!(k);
    }
    doc
}

pub fn int_matrix_value(a: &IntMatrix) -> Value {
    Value::Array(
        a.rows()
            .map(|row| Value::Array(row.iter().map(int_value).collect()))
            .collect(),
    )
}

pub fn rat_matrix_value(a: &RatMatrix) -> Value {
    Value::Array(
        a.rows()
            .map(|row| Value::Array(row.iter().map(|q| json!(q.to_string())).collect()))
            .collect(),
    )
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Dotted-key leaves of a document; arrays of scalars stay on one line.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(String::new(), v, &mut out);
    out
}

fn walk(prefix: String, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{}.{}", prefix, k)
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                walk(join(k), child, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object()) => {
            for (k, child) in items.iter().enumerate() {
                walk(join(&k.to_string()), child, out);
            }
        }
        other => out.push((prefix, scalar_text_or_json(other))),
    }
}

fn scalar_text_or_json(v: &Value) -> String {
    match v {
        Value::Array(_) => v.to_string(),
        other => scalar_text(other),
    }
}

pub fn render(doc: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).expect("in-memory write");
            for (k, v) in flatten(doc) {
                w.write_record([k, v]).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
        }
        Format::Text => {
            let rows = flatten(doc);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter()
                .map(|(k, v)| format!("{:<width$}  {}\n", k, v, width = width))
                .collect()
        }
    }
}

/// Removes timing so two documents can be compared byte for byte.
pub fn strip_timing(doc: &mut Value) {
    if let Value::Object(map) = doc {
        map.remove("elapsed_ms");
        for v in map.values_mut() {
            strip_timing(v);
        }
    }
}

pub fn object(pairs: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    Value::Object(
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}
