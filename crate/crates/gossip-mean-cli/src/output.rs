//! Output documents: CSV and a structured self-describing JSON format.
//!
//! Every run emits `{config, seed, timestamp, meta, columns, rows}`. In CSV
//! the config, seed, timestamp and meta entries become `#`-prefixed header
//! lines before the column header; in the structured format the same data
//! is one JSON object. Numeric values are printed with 12 significant
//! digits. The timestamp is the only field excluded from reproducibility
//! comparisons.

use crate::config::ExperimentConfig;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Significant digits for every numeric output.
pub const SIG_DIGITS: usize = 12;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Text(String),
    /// Rendered as an empty CSV field / JSON null.
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => fmt_sig(*v, SIG_DIGITS),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::UInt(v) => json!(v),
            Cell::Float(v) => float_to_json(*v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// A finished run ready for serialization.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub timestamp: u64,
    /// Scalar or small-array summaries, emitted in insertion order.
    pub meta: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl RunOutput {
    pub fn new(config: ExperimentConfig, seed: u64) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            config,
            seed,
            timestamp,
            meta: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta_entry(&mut self, key: &str, value: Value) {
        self.meta.push((key.to_string(), round_floats(value)));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let config = serde_json::to_string(&self.config).expect("config serializes");
        out.push_str(&format!("# config: {config}\n"));
        out.push_str(&format!("# seed: {}\n", self.seed));
        out.push_str(&format!("# timestamp: {}\n", self.timestamp));
        for (key, value) in &self.meta {
            out.push_str(&format!("# {key}: {value}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_structured(&self) -> String {
        let meta: serde_json::Map<String, Value> = self.meta.iter().cloned().collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Array(row.iter().map(Cell::to_json).collect()))
            .collect();
        let doc = json!({
            "config": self.config,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "meta": meta,
            "columns": self.columns,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
        text.push('\n');
        text
    }
}

/// Rounds every non-integer number in a JSON value to [`SIG_DIGITS`].
fn round_floats(value: Value) -> Value {
    match value {
        Value::Number(num) => {
            if num.is_f64() {
                float_to_json(num.as_f64().expect("checked"))
            } else {
                Value::Number(num)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

/// JSON cannot hold NaN or infinities; those become null.
fn float_to_json(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, v)
        .parse()
        .expect("round-trip");
    serde_json::Number::from_f64(rounded)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// `%.12g`-style formatting: `sig` significant digits, decimal notation for
/// moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    debug_assert!(sig >= 1);
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("valid exponent");
    if exponent >= -4 && exponent < sig as i32 {
        let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exponent)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A structured-format document read back from disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructuredDoc {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub timestamp: u64,
    pub meta: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// Parses a structured-format document.
pub fn read_structured(bytes: &[u8]) -> Result<StructuredDoc, serde_json::Error> {
    serde_json::from_slice(bytes)
}

/// A CSV document split into its comment headers, column header, and rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvDocument {
    /// `(key, value)` pairs from `# key: value` lines, in order.
    pub comments: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CsvParseError {
    #[error("missing column header")]
    MissingHeader,
    #[error("row {row} has {got} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("malformed comment line {0}")]
    MalformedComment(usize),
}

/// Parses a CSV document produced by [`RunOutput::to_csv`]. Never panics on
/// arbitrary input.
pub fn parse_csv_document(text: &str) -> Result<CsvDocument, CsvParseError> {
    let mut comments = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if header.is_some() {
                return Err(CsvParseError::MalformedComment(lineno));
            }
            let trimmed = comment.trim_start();
            match trimmed.split_once(':') {
                Some((key, value)) => {
                    comments.push((key.trim().to_string(), value.trim().to_string()))
                }
                None => return Err(CsvParseError::MalformedComment(lineno)),
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(CsvParseError::RaggedRow {
                        row: rows.len(),
                        got: fields.len(),
                        expected: h.len(),
                    });
                }
                rows.push(fields);
            }
        }
    }
    let header = header.ok_or(CsvParseError::MissingHeader)?;
    Ok(CsvDocument {
        comments,
        header,
        rows,
    })
}

/// Strips the timestamp so two runs of the same config compare equal.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|line| {
            !line.starts_with("# timestamp:") && !line.trim_start().starts_with("\"timestamp\":")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
