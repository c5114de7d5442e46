use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};
use serde_json::{Map, Value};

use super::Format;

/// Tabular result of one command plus the records surrounding it.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_owned(), value.into());
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_owned(), value.into());
    }

    pub fn summarize(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_owned(), value.into());
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    command: &'a str,
    params: &'a Map<String, Value>,
    results: Results<'a>,
    diagnostics: &'a Map<String, Value>,
}

#[derive(Serialize)]
struct Results<'a> {
    columns: &'a [String],
    rows: &'a [Vec<Value>],
    #[serde(skip_serializing_if = "Map::is_empty")]
    summary: &'a Map<String, Value>,
}

/// Compact JSON whose floats always carry 17 significant digits.
struct FixedFloats(CompactFormatter);

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fixed(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn fixed(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json_bytes<S: Serialize>(value: &S) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedFloats(CompactFormatter));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => fixed(n.as_f64().expect("f64 number")),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

pub fn render(report: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = to_json_bytes(&Envelope {
                schema_version: 1,
                command: report.command,
                params: &report.params,
                results: Results {
                    columns: &report.columns,
                    rows: &report.rows,
                    summary: &report.summary,
                },
                diagnostics: &report.diagnostics,
            });
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.columns).expect("in-memory write");
            for row in &report.rows {
                w.write_record(row.iter().map(csv_cell)).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}
