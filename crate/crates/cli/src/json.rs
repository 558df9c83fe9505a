//! Canonical JSON: sorted keys (serde_json's default map is a BTreeMap) and
//! every float written with 17 significant digits.

use std::fmt::Write;

use serde_json::{json, Map, Value};
use xxchain_core::chain::{Basis, DenseOperator};
use xxchain_core::linalg::{CMat, C64};

pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex(z: C64) -> Value {
    json!({ "re": float(z.re), "im": float(z.im) })
}

fn write_float(out: &mut String, x: f64) {
    if x == 0.0 {
        out.push_str("0.0000000000000000e0");
    } else {
        write!(out, "{:.16e}", x).unwrap();
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat(' ').take(2 * n));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                write_float(out, n.as_f64().unwrap());
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // numeric rows stay on one line
            if items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let n = map.len();
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < n { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

pub fn basis_label(b: &Basis) -> String {
    match b {
        Basis::Full { sites } => format!("full:{}", sites),
        Basis::Sector { sites, n_up } => format!("sector:{}:{}", sites, n_up),
        Basis::Custom(s) => s.clone(),
    }
}

/// {dim, basis, re[][], im[][]}
pub fn matrix_json(m: &CMat, basis: &str) -> Value {
    let rows = |f: fn(&C64) -> f64| -> Value {
        Value::Array((0..m.nrows()).map(|r| Value::Array((0..m.ncols()).map(|c| float(f(&m[(r, c)]))).collect())).collect())
    };
    let mut o = Map::new();
    o.insert("dim".into(), json!(m.nrows()));
    o.insert("basis".into(), json!(basis));
    o.insert("re".into(), rows(|z| z.re));
    o.insert("im".into(), rows(|z| z.im));
    Value::Object(o)
}

pub fn operator_json(op: &DenseOperator) -> Value {
    matrix_json(&op.matrix, &basis_label(&op.basis))
}
