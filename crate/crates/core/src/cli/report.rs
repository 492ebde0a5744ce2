//! Deterministic report serialisation: sorted keys, reals with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::mesh::export::fmt_real;
use crate::tensor::{Mat3, SymMat3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
    Map(Report),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as i64)
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Int(n as i64)
    }
}

impl From<Report> for Value {
    fn from(r: Report) -> Self {
        Value::Map(r)
    }
}

impl From<&Vec3> for Value {
    fn from(v: &Vec3) -> Self {
        Value::List(v.iter().map(|x| Value::Real(*x)).collect())
    }
}

/// Row-major nested lists.
impl From<&Mat3> for Value {
    fn from(m: &Mat3) -> Self {
        Value::List((0..3).map(|i| Value::List((0..3).map(|j| Value::Real(m[(i, j)])).collect())).collect())
    }
}

impl From<&SymMat3> for Value {
    fn from(m: &SymMat3) -> Self {
        Value::from(m.as_mat())
    }
}

impl<T: Into<Value>> From<Vec<T>> for Value {
    fn from(v: Vec<T>) -> Self {
        Value::List(v.into_iter().map(Into::into).collect())
    }
}

/// A nested record with sorted keys.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report(BTreeMap<String, Value>);

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        write_map(&mut out, self, 0);
        out.push('\n');
        out
    }

    /// Two-column `key,value` listing with dotted paths and list indices.
    pub fn to_csv(&self) -> String {
        let mut rows = Vec::new();
        flatten("", &Value::Map(self.clone()), &mut rows);
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Real(x) if x.is_finite() => Some(fmt_real(*x)),
        Value::Real(_) => Some("null".into()),
        Value::Int(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Str(s) => Some(escape(s)),
        _ => None,
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    if let Some(s) = scalar(v) {
        out.push_str(&s);
        return;
    }
    match v {
        Value::List(items) if items.iter().all(|i| scalar(i).is_some()) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, item, depth);
            }
            out.push(']');
        }
        Value::List(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Map(m) => write_map(out, m, depth),
        _ => unreachable!("scalars handled above"),
    }
}

fn write_map(out: &mut String, m: &Report, depth: usize) {
    if m.0.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    let n = m.0.len();
    for (i, (k, v)) in m.0.iter().enumerate() {
        indent(out, depth + 1);
        out.push_str(&escape(k));
        out.push_str(": ");
        write_value(out, v, depth + 1);
        out.push_str(if i + 1 < n { ",\n" } else { "\n" });
    }
    indent(out, depth);
    out.push('}');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Map(m) => {
            for (k, v) in &m.0 {
                flatten(&join(k), v, rows);
            }
        }
        Value::List(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), item, rows);
            }
        }
        Value::Str(s) => rows.push((prefix.to_string(), s.replace(',', ";"))),
        other => rows.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_reals_fixed() {
        let r = Report::new().with("zeta", 1.0).with("alpha", 2usize).with("mid", "x\"y");
        assert_eq!(r.to_json(), "{\n  \"alpha\": 2,\n  \"mid\": \"x\\\"y\",\n  \"zeta\": 1.0000000000000000e0\n}\n");
    }

    #[test]
    fn nested_values_and_csv() {
        let inner = Report::new().with("v", &Vec3::new(1.0, 0.0, -2.0));
        let r = Report::new().with("inner", inner).with("flag", true).with("nan", f64::NAN);
        let json = r.to_json();
        assert!(json.contains("\"nan\": null"));
        assert!(json.contains("[1.0000000000000000e0, 0.0000000000000000e0, -2.0000000000000000e0]"));
        let csv = r.to_csv();
        assert!(csv.starts_with("key,value\nflag,true\ninner.v.0,1.0000000000000000e0\n"));
    }
}
