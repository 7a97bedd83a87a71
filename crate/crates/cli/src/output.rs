//! Tabular output as CSV (header row, `,` separator, `\n` line endings) or as
//! a JSON document with one object per row.

use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// A job result: the table plus optional metadata.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub meta: Option<Value>,
}

/// Scientific notation with `precision` significant digits.
pub fn format_float(v: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), v)
}

pub fn to_csv(table: &Table, precision: usize) -> String {
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        let fields: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Float(v) => format_float(*v, precision),
                Cell::Int(i) => i.to_string(),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// `{"rows": [{column: value, ...}, ...], "meta": ...}`; non-finite floats
/// become `null`.
pub fn to_json(report: &Report) -> String {
    let rows: Vec<Value> = report
        .table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = report
                .table
                .columns
                .iter()
                .zip(row)
                .map(|(k, c)| {
                    let v = match c {
                        Cell::Float(v) => Value::from(*v),
                        Cell::Int(i) => Value::from(*i),
                        Cell::Text(s) => Value::from(s.as_str()),
                    };
                    (k.to_string(), v)
                })
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("rows".into(), Value::Array(rows));
    if let Some(meta) = &report.meta {
        doc.insert("meta".into(), meta.clone());
    }
    let mut text =
        serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn render(report: &Report, format: Format, precision: usize) -> String {
    match format {
        Format::Csv => to_csv(&report.table, precision),
        Format::Json => to_json(report),
    }
}

/// Parses CSV as written by [`to_csv`]: a header row and unquoted fields.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty CSV")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                row.len(),
                header.len()
            ));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
