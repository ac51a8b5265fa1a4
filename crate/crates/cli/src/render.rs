//! Tabular output in three formats with a configuration echo.
//!
//! Reals print with six fixed decimals in every format so that outputs are
//! byte-stable across platforms. Absent values print as `NA` (null in JSON).

use std::fmt::Write as _;
use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Real(f64),
    Na,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => fixed(*x),
            Cell::Na => "NA".to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) if x.is_finite() => fixed(*x).parse::<f64>().map(Value::from).unwrap_or(Value::Null),
            Cell::Real(_) | Cell::Na => Value::Null,
        }
    }
}

/// Six decimals, with negative zero folded into zero.
pub fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(i: $t) -> Self {
                Cell::Int(i as i64)
            }
        }
    )*};
}
int_cell!(i32, u32, u64, usize);

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Na, Into::into)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Ordered `key=value` pairs describing the run.
pub type Config = Vec<(String, String)>;

pub fn render(table: &Table, config: &Config, format: Format) -> String {
    match format {
        Format::Table => render_table(table, config),
        Format::Csv => render_csv(table, config),
        Format::Json => render_json(table, config),
    }
}

fn echo(config: &Config) -> String {
    let mut s = String::new();
    for (k, v) in config {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

fn render_table(table: &Table, config: &Config) -> String {
    let cells: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
    let mut width: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
    for r in &cells {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut s = echo(config);
    let line = |s: &mut String, items: Vec<&str>| {
        let parts: Vec<String> = items.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(&mut s, table.columns.clone());
    for r in &cells {
        line(&mut s, r.iter().map(String::as_str).collect());
    }
    s
}

fn render_csv(table: &Table, config: &Config) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for r in &table.rows {
        w.write_record(r.iter().map(Cell::text)).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    echo(config) + &body
}

fn render_json(table: &Table, config: &Config) -> String {
    let mut cfg = Map::new();
    for (k, v) in config {
        cfg.insert(k.clone(), Value::String(v.clone()));
    }
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            for (c, v) in table.columns.iter().zip(r) {
                m.insert(c.to_string(), v.json());
            }
            Value::Object(m)
        })
        .collect();
    let mut top = Map::new();
    top.insert("config".into(), Value::Object(cfg));
    top.insert("rows".into(), Value::Array(rows));
    serde_json::to_string_pretty(&Value::Object(top)).expect("json values serialize") + "\n"
}

pub fn emit(out: &mut dyn Write, table: &Table, config: &Config, format: Format) -> io::Result<()> {
    out.write_all(render(table, config, format).as_bytes())
}
