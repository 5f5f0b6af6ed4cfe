//! Tabular output. CSV gets the resolved config as leading `# ` comment
//! lines, then a header row; JSON embeds the config as an object.

use std::io::Write;

use nvlab::Complex64;
use serde_json::{json, Map, Value};

use crate::config::{Config, Format};
use crate::CliError;

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0"
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// extra top-level JSON entries
    pub extra: Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), ..Table::default() }
    }

    pub fn push(&mut self, row: Row) {
        debug_assert_eq!(row.0.len(), self.columns.len());
        self.rows.push(row.0);
    }
}

/// Row builder; complex values take two cells.
#[derive(Debug, Default)]
pub struct Row(Vec<Cell>);

impl Row {
    pub fn new() -> Self {
        Row(Vec::new())
    }
    pub fn num(mut self, x: f64) -> Self {
        self.0.push(Cell::Num(x));
        self
    }
    pub fn opt(mut self, x: Option<f64>) -> Self {
        self.0.push(x.map_or(Cell::Empty, Cell::Num));
        self
    }
    pub fn c(self, z: Complex64) -> Self {
        self.num(z.re).num(z.im)
    }
    pub fn int(mut self, n: usize) -> Self {
        self.0.push(Cell::Int(n));
        self
    }
    pub fn text(mut self, s: &str) -> Self {
        self.0.push(Cell::Text(s.to_string()));
        self
    }
    pub fn flag(mut self, b: bool) -> Self {
        self.0.push(Cell::Bool(b));
        self
    }
}

pub fn render(table: &Table, config: &Config) -> Result<Vec<u8>, CliError> {
    match config.format.unwrap_or(Format::Csv) {
        Format::Csv => render_csv(table, config),
        Format::Json => render_json(table, config),
    }
}

fn render_csv(table: &Table, config: &Config) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    for line in config.to_toml().lines() {
        writeln!(out, "# {line}").expect("write to vec");
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let wrap = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(&table.columns).map_err(wrap)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv)).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

fn render_json(table: &Table, config: &Config) -> Result<Vec<u8>, CliError> {
    let rows: Vec<Value> =
        table.rows.iter().map(|r| Value::Object(table.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect())).collect();
    let mut top = Map::new();
    top.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    top.insert("columns".into(), json!(table.columns));
    top.insert("rows".into(), Value::Array(rows));
    for (k, v) in &table.extra {
        top.insert(k.clone(), v.clone());
    }
    let mut out = serde_json::to_vec_pretty(&Value::Object(top)).expect("json serializes");
    out.push(b'\n');
    Ok(out)
}

pub fn emit(bytes: &[u8], config: &Config) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}
