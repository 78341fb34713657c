//! Deterministic result serialization. JSON is emitted by hand with fields
//! in insertion order and every float printed as `{:.16e}` (17 significant
//! digits), so identical runs produce byte-identical artifacts. Infinite
//! values are serialized as the string "inf", never as a float sentinel.

use crate::spectral::ExtendedSum;

#[derive(Clone, Debug)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Extended(ExtendedSum),
    FloatList(Vec<f64>),
    Record(Report),
    RecordList(Vec<Report>),
}

/// Ordered key-value record.
#[derive(Clone, Debug, Default)]
pub struct Report {
    fields: Vec<(String, Value)>,
}

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

impl Value {
    fn write(&self, out: &mut String) {
        match self {
            Value::Float(v) => out.push_str(&fmt_float(*v)),
            Value::Int(v) => out.push_str(&v.to_string()),
            Value::Bool(v) => out.push_str(if *v { "true" } else { "false" }),
            Value::Str(s) => {
                out.push('"');
                out.push_str(&escape(s));
                out.push('"');
            }
            Value::Extended(ExtendedSum::Finite(v)) => out.push_str(&fmt_float(*v)),
            Value::Extended(ExtendedSum::Infinite) => out.push_str("\"inf\""),
            Value::FloatList(vs) => {
                out.push('[');
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&fmt_float(*v));
                }
                out.push(']');
            }
            Value::Record(r) => r.write(out),
            Value::RecordList(rs) => {
                out.push('[');
                for (i, r) in rs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    r.write(out);
                }
                out.push(']');
            }
        }
    }
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(mut self, key: &str, value: Value) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn float(self, key: &str, v: f64) -> Self {
        self.push(key, Value::Float(v))
    }

    pub fn int(self, key: &str, v: i64) -> Self {
        self.push(key, Value::Int(v))
    }

    pub fn bool(self, key: &str, v: bool) -> Self {
        self.push(key, Value::Bool(v))
    }

    pub fn str(self, key: &str, v: &str) -> Self {
        self.push(key, Value::Str(v.to_string()))
    }

    pub fn extended(self, key: &str, v: ExtendedSum) -> Self {
        self.push(key, Value::Extended(v))
    }

    /// A "status" field mirroring an extended value: "ok" or "infinite".
    pub fn status_of(self, v: ExtendedSum) -> Self {
        self.str(
            "status",
            match v {
                ExtendedSum::Finite(_) => "ok",
                ExtendedSum::Infinite => "infinite",
            },
        )
    }

    fn write(&self, out: &mut String) {
        out.push('{');
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('"');
            out.push_str(&escape(k));
            out.push_str("\":");
            v.write(out);
        }
        out.push('}');
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out.push('\n');
        out
    }
}

/// CSV with a header row; floats in the same 17-digit format as JSON.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Convergence curve CSV: truncation level and partial sum.
pub fn csv_curve(rows: &[(u64, f64)]) -> String {
    let mut out = String::from("N,partial_sum\n");
    for &(n, v) in rows {
        out.push_str(&format!("{n},{}\n", fmt_float(v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape_and_float_format() {
        let r = Report::new()
            .str("command", "constant")
            .extended("constant_sq", ExtendedSum::Finite(0.5))
            .status_of(ExtendedSum::Finite(0.5))
            .int("truncation_level", 42)
            .bool("certified", true);
        let s = r.to_json();
        assert_eq!(
            s,
            "{\"command\":\"constant\",\"constant_sq\":5.0000000000000000e-1,\"status\":\"ok\",\"truncation_level\":42,\"certified\":true}\n"
        );
    }

    #[test]
    fn infinite_as_string() {
        let s = Report::new()
            .extended("value", ExtendedSum::Infinite)
            .status_of(ExtendedSum::Infinite)
            .to_json();
        assert_eq!(s, "{\"value\":\"inf\",\"status\":\"infinite\"}\n");
    }

    #[test]
    fn float_roundtrip() {
        for v in [std::f64::consts::PI, 1e-300, -2.5, 6.02214076e23] {
            let printed = fmt_float(v);
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{printed}");
        }
    }

    #[test]
    fn csv_output() {
        let s = csv_curve(&[(1, 1.0), (2, 1.5)]);
        assert!(s.starts_with("N,partial_sum\n1,1.0000000000000000e0\n"));
        let t = csv_table(&["N", "mu", "E"], &[vec![0.25, 1.0, 0.5]]);
        assert!(t.starts_with("N,mu,E\n"));
    }

    #[test]
    fn string_escaping() {
        let s = Report::new().str("msg", "a\"b\\c\nd").to_json();
        assert_eq!(s, "{\"msg\":\"a\\\"b\\\\c\\nd\"}\n");
    }
}
