//! Reading distance matrices, weight files and geodesic files.

use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, MetricError};
use crate::metric::{validate_metric, FiniteMetricSpace};

/// Anything that makes the run an input or usage error (exit status 2).
#[derive(Debug)]
pub enum InputError {
    Io(String),
    Parse(String),
    Metric(MetricError),
    Core(Error),
    Usage(String),
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Io(m) => write!(f, "cannot read input: {m}"),
            InputError::Parse(m) => write!(f, "cannot parse input: {m}"),
            InputError::Metric(e) => write!(f, "{e}"),
            InputError::Core(e) => write!(f, "{e}"),
            InputError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidMetric(m) => InputError::Metric(m),
            other => InputError::Core(other),
        }
    }
}

impl From<MetricError> for InputError {
    fn from(e: MetricError) -> Self {
        InputError::Metric(e)
    }
}

impl InputError {
    pub fn kind(&self) -> &'static str {
        match self {
            InputError::Io(_) => "io",
            InputError::Parse(_) => "parse",
            InputError::Metric(_) => "invalid_metric",
            InputError::Core(_) => "invalid_argument",
            InputError::Usage(_) => "usage",
        }
    }

    pub fn detail(&self) -> Value {
        let mut v = json!({ "kind": self.kind(), "error": self.to_string() });
        if let InputError::Metric(m) = self {
            v["violations"] = serde_json::to_value(&m.violations).unwrap_or(Value::Null);
            v["triangle_total"] = json!(m.triangle_total);
        }
        v
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, InputError> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(|e| InputError::Io(format!("stdin: {e}")))?;
        return Ok(buf);
    }
    std::fs::read(path).map_err(|e| InputError::Io(format!("{}: {e}", path.display())))
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Deserialize)]
struct JsonMatrix {
    #[serde(default)]
    labels: Option<Vec<String>>,
    d: Vec<Vec<f64>>,
}

/// Parses a CSV or JSON distance matrix and validates it.
///
/// JSON input is `{"labels": [...], "d": [[...]]}`, or a report whose
/// `result` has that shape. CSV input may carry a header row and/or a
/// leading column of labels.
pub fn parse_matrix(bytes: &[u8]) -> Result<FiniteMetricSpace, InputError> {
    let text = std::str::from_utf8(bytes).map_err(|e| InputError::Parse(format!("not UTF-8: {e}")))?;
    let (raw, labels) = if text.trim_start().starts_with('{') {
        parse_json(text)?
    } else {
        parse_csv(text)?
    };
    Ok(validate_metric(&raw, labels)?)
}

type RawMatrix = (Vec<Vec<f64>>, Option<Vec<String>>);

fn parse_json(text: &str) -> Result<RawMatrix, InputError> {
    let value: Value = serde_json::from_str(text).map_err(|e| InputError::Parse(format!("JSON: {e}")))?;
    let body = if value.get("d").is_none() { value.get("result").cloned().unwrap_or(value) } else { value };
    let m: JsonMatrix = serde_json::from_value(body).map_err(|e| InputError::Parse(format!("JSON matrix: {e}")))?;
    Ok((m.d, m.labels))
}

fn parse_csv(text: &str) -> Result<RawMatrix, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| InputError::Parse(format!("CSV: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(InputError::Parse("empty matrix".into()));
    }
    let numeric = |s: &str| s.parse::<f64>().is_ok();
    // a leading label in the first row alone marks a label column, not a header
    let header = rows[0].iter().skip(1).any(|c| !numeric(c)) || rows[0][0].is_empty();
    let header_row = if header { Some(rows.remove(0)) } else { None };
    let corner = header_row.as_ref().is_some_and(|h| h[0].is_empty());
    let label_col = corner || (!rows.is_empty() && rows.iter().all(|r| r.first().is_some_and(|c| !numeric(c))));
    let mut labels = None;
    if label_col {
        labels = Some(rows.iter().map(|r| r[0].clone()).collect::<Vec<_>>());
        for r in &mut rows {
            r.remove(0);
        }
    } else if let Some(h) = header_row {
        labels = Some(h);
    }
    let mut raw = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let mut row = Vec::with_capacity(r.len());
        for (j, c) in r.iter().enumerate() {
            let v = c
                .parse::<f64>()
                .map_err(|_| InputError::Parse(format!("row {i}, column {j}: {c:?} is not a number")))?;
            row.push(v);
        }
        raw.push(row);
    }
    Ok((raw, labels))
}

/// A point given by index or by label.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NodeRef {
    Index(usize),
    Label(String),
}

impl NodeRef {
    pub fn resolve(&self, space: &FiniteMetricSpace) -> Result<usize, InputError> {
        match self {
            NodeRef::Index(i) => {
                space.check_index(*i)?;
                Ok(*i)
            }
            NodeRef::Label(l) => resolve_token(space, l),
        }
    }
}

/// A label if one matches, otherwise an index.
pub fn resolve_token(space: &FiniteMetricSpace, token: &str) -> Result<usize, InputError> {
    let token = token.trim();
    if let Some(i) = space.index_of(token) {
        return Ok(i);
    }
    let i: usize = token
        .parse()
        .map_err(|_| InputError::Usage(format!("{token:?} is neither a label nor an index")))?;
    space.check_index(i)?;
    Ok(i)
}

pub fn resolve_list(space: &FiniteMetricSpace, list: &str) -> Result<Vec<usize>, InputError> {
    list.split(',').filter(|t| !t.trim().is_empty()).map(|t| resolve_token(space, t)).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub p: NodeRef,
    pub points: Vec<NodeRef>,
    pub lambda: Option<Vec<f64>>,
}

pub struct Weights {
    pub p: usize,
    pub points: Vec<usize>,
    pub lambda: Vec<f64>,
}

pub fn read_weights(path: &Path, space: &FiniteMetricSpace) -> Result<Weights, InputError> {
    let bytes = read_bytes(path)?;
    let w: WeightsFile =
        serde_json::from_slice(&bytes).map_err(|e| InputError::Parse(format!("weights file: {e}")))?;
    let p = w.p.resolve(space)?;
    let points = w.points.iter().map(|r| r.resolve(space)).collect::<Result<Vec<_>, _>>()?;
    let lambda = w.lambda.unwrap_or_else(|| vec![1.0; points.len()]);
    Ok(Weights { p, points, lambda })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicInput {
    pub points: Vec<NodeRef>,
    /// Arclength parameters; defaults to distances from the first point.
    pub params: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicsFile {
    pub gamma: GeodesicInput,
    pub eta: GeodesicInput,
}

pub fn read_geodesics(path: &Path) -> Result<GeodesicsFile, InputError> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| InputError::Parse(format!("geodesics file: {e}")))
}

impl GeodesicInput {
    pub fn resolve(&self, space: &FiniteMetricSpace) -> Result<(Vec<usize>, Vec<f64>), InputError> {
        let idx = self.points.iter().map(|r| r.resolve(space)).collect::<Result<Vec<_>, _>>()?;
        let params = match &self.params {
            Some(p) => p.clone(),
            None => idx.iter().map(|&i| space.d(idx[0], i)).collect(),
        };
        Ok((idx, params))
    }
}
