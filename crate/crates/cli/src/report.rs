//! Report documents. Every command builds one `serde_json::Value`; `--json`
//! prints it as is and the default human format renders the same tree as
//! indented `key: value` lines, so both carry the same numbers.

use std::str::FromStr;

use serde_json::{Map, Number, Value};

/// A float as a JSON number with 17 significant digits, enough to re-parse
/// to the identical `f64`. Non-finite values become strings.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(x.to_string());
    }
    let text = format!("{x:.16e}");
    Number::from_str(&text)
        .map(Value::Number)
        .unwrap_or(Value::String(text))
}

pub fn num_vec(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn num_matrix(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| num_vec(r)).collect())
}

/// Object builder that keeps insertion order.
#[derive(Debug, Default)]
pub struct Doc(Map<String, Value>);

impl Doc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn build(self) -> Value {
        Value::Object(self.0)
    }
}

impl From<Doc> for Value {
    fn from(d: Doc) -> Value {
        d.build()
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(true) => Some("yes".into()),
        Value::Bool(false) => Some("no".into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flat_list(items: &[Value]) -> Option<String> {
    let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
    parts.map(|p| format!("[{}]", p.join(", ")))
}

fn render_into(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = k.replace('_', "-");
                match v {
                    Value::Array(items) => {
                        if let Some(line) = flat_list(items) {
                            out.push_str(&format!("{pad}{key}: {line}\n"));
                        } else {
                            out.push_str(&format!("{pad}{key}:\n"));
                            render_into(out, v, indent + 1);
                        }
                    }
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{key}:\n"));
                        render_into(out, v, indent + 1);
                    }
                    _ => {
                        let s = scalar(v).unwrap_or_default();
                        out.push_str(&format!("{pad}{key}: {s}\n"));
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match item {
                    Value::Array(inner) if flat_list(inner).is_some() => {
                        out.push_str(&format!("{pad}{}\n", flat_list(inner).unwrap()));
                    }
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}-\n"));
                        render_into(out, item, indent + 1);
                    }
                    _ => out.push_str(&format!("{pad}{}\n", scalar(item).unwrap_or_default())),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

pub fn render_human(value: &Value) -> String {
    let mut out = String::new();
    render_into(&mut out, value, 0);
    out
}
