//! JSON and CSV rendering of command output.

use std::fmt::Write as _;

use incbessel::ScaledValue;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Values with `|log_abs|` below this also get a plain decimal.
const DECIMAL_LOG_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Command output before formatting.
pub struct Output {
    pub command: &'static str,
    pub parameters: Value,
    pub results: Vec<Value>,
    pub summary: Value,
    /// CSV columns; each is a path into a result object.
    pub columns: Vec<Column>,
}

pub struct Column {
    pub header: String,
    pub path: Vec<String>,
    pub kind: Kind,
}

#[derive(Clone, Copy)]
pub enum Kind {
    Number,
    /// A `{sign, log_abs}` object: expands to three columns.
    Scaled,
    Text,
    /// Four-decimal table entry.
    Fixed4,
}

impl Column {
    pub fn new(header: &str, path: &str, kind: Kind) -> Self {
        Self {
            header: header.to_string(),
            path: path.split('.').map(str::to_string).collect(),
            kind,
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Adds a `decimal` field next to every `{sign, log_abs}` pair whose value
/// fits comfortably in an `f64`.
pub fn annotate_decimals(v: &mut Value) {
    match v {
        Value::Object(map) => {
            if let Some(d) = scaled_decimal(map) {
                map.insert("decimal".into(), json!(d));
            }
            for child in map.values_mut() {
                annotate_decimals(child);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(annotate_decimals),
        _ => {}
    }
}

fn scaled_parts(map: &Map<String, Value>) -> Option<(i64, f64)> {
    if map.len() > 3 || !map.keys().all(|k| k == "sign" || k == "log_abs" || k == "decimal") {
        return None;
    }
    Some((map.get("sign")?.as_i64()?, map.get("log_abs")?.as_f64()?))
}

fn scaled_decimal(map: &Map<String, Value>) -> Option<f64> {
    let (sign, log_abs) = scaled_parts(map)?;
    let s = ScaledValue::from_parts(sign as i8, log_abs)?;
    (log_abs.abs() < DECIMAL_LOG_LIMIT).then(|| s.value())
}

pub fn render(out: &Output, format: Format) -> String {
    match format {
        Format::Json => {
            let mut doc = json!({
                "command": out.command,
                "parameters": out.parameters,
                "results": out.results,
                "summary": out.summary,
            });
            annotate_decimals(&mut doc);
            let mut s = serde_json::to_string_pretty(&doc).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(out),
    }
}

fn lookup<'a>(v: &'a Value, path: &[String]) -> Option<&'a Value> {
    path.iter().try_fold(v, |cur, key| cur.get(key))
}

/// 17 significant digits.
pub fn full_precision(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:.16e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(out: &Output) -> String {
    let mut header = Vec::new();
    for c in &out.columns {
        match c.kind {
            Kind::Scaled => {
                header.push(format!("{}_sign", c.header));
                header.push(format!("{}_log_abs", c.header));
                header.push(c.header.clone());
            }
            _ => header.push(c.header.clone()),
        }
    }
    let mut s = header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
    s.push('\n');
    for r in &out.results {
        let mut fields = Vec::new();
        for c in &out.columns {
            let v = lookup(r, &c.path);
            match c.kind {
                Kind::Number => fields.push(v.and_then(Value::as_f64).map(full_precision).unwrap_or_default()),
                Kind::Fixed4 => fields.push(v.and_then(Value::as_f64).map(|x| format!("{x:.4}")).unwrap_or_default()),
                Kind::Text => fields.push(csv_field(&match v {
                    Some(Value::String(t)) => t.clone(),
                    Some(Value::Null) | None => String::new(),
                    Some(other) => other.to_string(),
                })),
                Kind::Scaled => {
                    let parts = v.and_then(Value::as_object).and_then(scaled_parts);
                    match parts {
                        Some((sign, log_abs)) => {
                            fields.push(sign.to_string());
                            fields.push(full_precision(log_abs));
                            let dec = ScaledValue::from_parts(sign as i8, log_abs)
                                .filter(|_| log_abs.abs() < DECIMAL_LOG_LIMIT)
                                .map(|v| full_precision(v.value()))
                                .unwrap_or_default();
                            fields.push(dec);
                        }
                        None => fields.extend([String::new(), String::new(), String::new()]),
                    }
                }
            }
        }
        let _ = writeln!(s, "{}", fields.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_added_only_when_representable() {
        let mut v = json!({"a": {"sign": 1, "log_abs": 0.0}, "b": [{"sign": -1, "log_abs": 800.0}]});
        annotate_decimals(&mut v);
        assert_eq!(v["a"]["decimal"], json!(1.0));
        assert!(v["b"][0].get("decimal").is_none());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(full_precision(0.1), "1.0000000000000001e-1");
        assert_eq!(full_precision(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
