//! Byte-stable JSON: object keys sorted, floats written with 17 significant
//! digits, integers left as integers, non-finite numbers rejected.

use serde::Serialize;
use serde_json::Value;
use serde_value::Value as Raw;

use crate::error::{Error, Result};

fn find_non_finite(v: &Raw, path: &mut Vec<String>) -> Option<String> {
    match v {
        Raw::F32(x) if !x.is_finite() => Some(path.join(".")),
        Raw::F64(x) if !x.is_finite() => Some(path.join(".")),
        Raw::Option(Some(inner)) | Raw::Newtype(inner) => find_non_finite(inner, path),
        Raw::Seq(items) => items.iter().enumerate().find_map(|(i, x)| {
            path.push(i.to_string());
            let r = find_non_finite(x, path);
            path.pop();
            r
        }),
        Raw::Map(m) => m.iter().find_map(|(k, x)| {
            let key = match k {
                Raw::String(s) => s.clone(),
                other => format!("{other:?}"),
            };
            path.push(key);
            let r = find_non_finite(x, path);
            path.pop();
            r
        }),
        _ => None,
    }
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let x = n.as_f64().unwrap_or(0.0);
                out.push_str(&format!("{x:.16e}"));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(&m[k], out);
            }
            out.push('}');
        }
    }
}

pub fn to_canonical_json<T: Serialize>(v: &T) -> Result<String> {
    let raw = serde_value::to_value(v).map_err(|e| Error::Serialization(e.to_string()))?;
    if let Some(path) = find_non_finite(&raw, &mut Vec::new()) {
        return Err(Error::Serialization(format!("non-finite number at `{path}`")));
    }
    let value = serde_json::to_value(v)?;
    let mut out = String::new();
    write_value(&value, &mut out);
    out.push('\n');
    Ok(out)
}

/// Re-emits arbitrary JSON text in canonical form.
pub fn canonicalize(text: &str) -> Result<String> {
    let v: Value = serde_json::from_str(text)?;
    to_canonical_json(&v)
}
