//! Output emission: CSV tables with metadata headers, and JSON documents.
//!
//! Floating-point table cells are printed with 15 significant digits in
//! scientific notation so that files round-trip through standard parsers
//! without precision loss.  JSON numbers use the shortest representation
//! that round-trips, which serde_json produces deterministically; two runs
//! with identical inputs therefore emit bitwise-identical documents.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

/// A metadata entry echoed into CSV `#` lines and JSON headers.
#[derive(Debug, Clone)]
pub enum MetaValue {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl MetaValue {
    fn display(&self) -> String {
        match self {
            MetaValue::Int(v) => v.to_string(),
            MetaValue::Float(v) => format!("{v}"),
            MetaValue::Text(v) => v.clone(),
            MetaValue::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            MetaValue::Int(v) => serde_json::json!(v),
            MetaValue::Float(v) => serde_json::json!(v),
            MetaValue::Text(v) => serde_json::json!(v),
            MetaValue::Bool(v) => serde_json::json!(v),
        }
    }
}

/// A tabular result: metadata, column names, and numeric rows.
#[derive(Debug)]
pub struct Table {
    pub command: &'static str,
    pub meta: Vec<(&'static str, MetaValue)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Table {
            command,
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta_int(&mut self, key: &'static str, value: u64) {
        self.meta.push((key, MetaValue::Int(value)));
    }

    pub fn meta_float(&mut self, key: &'static str, value: f64) {
        self.meta.push((key, MetaValue::Float(value)));
    }

    pub fn meta_text(&mut self, key: &'static str, value: impl Into<String>) {
        self.meta.push((key, MetaValue::Text(value.into())));
    }

    pub fn meta_bool(&mut self, key: &'static str, value: bool) {
        self.meta.push((key, MetaValue::Bool(value)));
    }

    /// Render as CSV: `#` metadata lines, a header line, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# version: {}", env!("CARGO_PKG_VERSION"));
        for (key, value) in &self.meta {
            let _ = writeln!(out, "# {}: {}", key, value.display());
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|x| format_cell(*x)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// Render as a single JSON object with the same metadata plus the rows.
    pub fn to_json(&self) -> String {
        let mut doc = serde_json::Map::new();
        doc.insert("command".into(), serde_json::json!(self.command));
        doc.insert(
            "version".into(),
            serde_json::json!(env!("CARGO_PKG_VERSION")),
        );
        for (key, value) in &self.meta {
            doc.insert((*key).into(), value.json());
        }
        doc.insert("columns".into(), serde_json::json!(self.columns));
        doc.insert("rows".into(), serde_json::json!(self.rows));
        let mut text = serde_json::Value::Object(doc).to_string();
        text.push('\n');
        text
    }
}

/// A report rendered as CSV: metadata lines, then one `metric,value` row
/// per named quantity.  The JSON rendering of reports uses typed structs
/// instead, so this only carries the CSV path.
#[derive(Debug)]
pub struct KvTable {
    pub command: &'static str,
    pub meta: Vec<(&'static str, MetaValue)>,
    pub entries: Vec<(&'static str, f64)>,
}

impl KvTable {
    pub fn new(command: &'static str) -> Self {
        KvTable {
            command,
            meta: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn meta_int(&mut self, key: &'static str, value: u64) {
        self.meta.push((key, MetaValue::Int(value)));
    }

    pub fn meta_float(&mut self, key: &'static str, value: f64) {
        self.meta.push((key, MetaValue::Float(value)));
    }

    pub fn meta_text(&mut self, key: &'static str, value: impl Into<String>) {
        self.meta.push((key, MetaValue::Text(value.into())));
    }

    pub fn meta_bool(&mut self, key: &'static str, value: bool) {
        self.meta.push((key, MetaValue::Bool(value)));
    }

    pub fn entry(&mut self, name: &'static str, value: f64) {
        self.entries.push((name, value));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# version: {}", env!("CARGO_PKG_VERSION"));
        for (key, value) in &self.meta {
            let _ = writeln!(out, "# {}: {}", key, value.display());
        }
        let _ = writeln!(out, "metric,value");
        for (name, value) in &self.entries {
            let _ = writeln!(out, "{},{}", name, format_cell(*value));
        }
        out
    }
}

/// 15 significant digits, scientific notation.
pub fn format_cell(x: f64) -> String {
    format!("{x:.14e}")
}

/// Write `text` to the file at `out`, or to standard output when absent.
pub fn deliver(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write output file {}: {e}", path.display())),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|()| lock.flush())
                .map_err(|e| format!("cannot write to standard output: {e}"))
        }
    }
}
