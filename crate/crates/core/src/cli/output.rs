//! Report envelope and its renderings.

use std::collections::BTreeMap;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::metric::FiniteMetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The checked property holds.
    Holds,
    /// The checked property fails; the result carries the witness.
    Fails,
    /// A construction with no pass/fail property completed.
    Ok,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Holds | Status::Ok => 0,
            Status::Fails => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input_digest: Option<String>,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub status: Status,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            tool: "curvkit",
            version: crate::VERSION,
            command: command.to_owned(),
            input_digest: None,
            tolerances: BTreeMap::new(),
            status: Status::Error,
            result: Value::Null,
        }
    }
}

/// Renders a report. `matrix` switches CSV output to the plain matrix so it
/// can be read back as input.
pub fn render(report: &Report, format: Format, matrix: Option<&FiniteMetricSpace>) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => match matrix {
            Some(m) => matrix_csv(m),
            None => flat_csv(report),
        },
        Format::Text => text(report),
    }
}

fn matrix_csv(space: &FiniteMetricSpace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("").chain(space.labels().iter().map(String::as_str)).collect();
    w.write_record(&header).expect("in-memory write");
    for (i, row) in space.rows().iter().enumerate() {
        let cells: Vec<String> = std::iter::once(space.label(i).to_owned()).chain(row.iter().map(|v| v.to_string())).collect();
        w.write_record(&cells).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_owned(), s.clone())),
        other => out.push((prefix.to_owned(), other.to_string())),
    }
}

fn flat_csv(report: &Report) -> String {
    let value = serde_json::to_value(report).expect("reports serialize");
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "value"]).expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k, v]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

fn short(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        let s = format!("{x:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_owned()
    } else {
        format!("{x:.6e}")
    }
}

fn text_value(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text_value(x, indent + 1, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for item in items {
                            let mut line = String::new();
                            text_value(item, 0, &mut line);
                            out.push_str(&format!("{pad}  - {}\n", line.trim_end().replace('\n', "; ")));
                        }
                    }
                    _ => {
                        let mut line = String::new();
                        text_value(x, 0, &mut line);
                        out.push_str(&format!("{pad}{k}: {}\n", line.trim_end()));
                    }
                }
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|i| {
                    let mut s = String::new();
                    text_value(i, 0, &mut s);
                    s.trim_end().to_owned()
                })
                .collect();
            out.push_str(&format!("[{}]", parts.join(", ")));
        }
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => out.push_str(&short(x)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(s),
        Value::Bool(b) => out.push_str(&b.to_string()),
        Value::Null => out.push('-'),
    }
}

fn text(report: &Report) -> String {
    let mut out = format!("curvkit {} {}: {}\n", report.version, report.command, serde_json::to_value(report.status).expect("status").as_str().unwrap_or(""));
    if let Some(d) = &report.input_digest {
        out.push_str(&format!("input sha256: {d}\n"));
    }
    for (k, v) in &report.tolerances {
        out.push_str(&format!("tolerance {k}: {}\n", short(*v)));
    }
    text_value(&report.result, 0, &mut out);
    out
}
