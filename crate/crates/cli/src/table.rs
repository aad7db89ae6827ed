//! Row model, column schemas and CSV/JSON writers.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::args::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Text,
    Bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub name: &'static str,
    pub kind: Kind,
    /// Whether the cell may be empty (CSV) / null (JSON).
    pub optional: bool,
}

const fn col(name: &'static str, kind: Kind) -> Column {
    Column { name, kind, optional: false }
}

const fn opt(name: &'static str, kind: Kind) -> Column {
    Column { name, kind, optional: true }
}

pub const BOUNDS_COLUMNS: &[Column] = &[
    col("N", Kind::Int),
    col("family", Kind::Text),
    col("p", Kind::Float),
    col("eps", Kind::Float),
    col("k", Kind::Float),
    col("sigma2", Kind::Float),
    col("j_lb", Kind::Float),
    col("j_ub", Kind::Float),
    col("j_res_lb", Kind::Float),
    col("j_res_ub", Kind::Float),
    col("r_ave", Kind::Float),
    col("d_max", Kind::Int),
    col("lambda2", Kind::Float),
    col("lambdaN", Kind::Float),
    opt("requested_n", Kind::Int),
    opt("realization", Kind::Int),
    opt("graph_seed", Kind::Int),
    opt("attempts", Kind::Int),
];

pub const EXACT_EXTRA: &[Column] = &[
    opt("j_exact", Kind::Float),
    opt("rel_lb", Kind::Float),
    opt("rel_ub", Kind::Float),
];

pub const SIM_EXTRA: &[Column] = &[
    col("j_hat", Kind::Float),
    col("std_error", Kind::Float),
    col("converged", Kind::Bool),
    opt("drift", Kind::Float),
    col("horizon", Kind::Int),
    col("ensemble", Kind::Int),
    col("noise", Kind::Text),
    col("sim_seed", Kind::Int),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Bounds,
    Exact,
    Simulate,
}

impl Schema {
    pub fn columns(self) -> Vec<Column> {
        let mut cols = BOUNDS_COLUMNS.to_vec();
        if matches!(self, Schema::Exact | Schema::Simulate) {
            cols.extend_from_slice(EXACT_EXTRA);
        }
        if self == Schema::Simulate {
            cols.extend_from_slice(SIM_EXTRA);
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_nan() {
            Cell::Empty
        } else {
            Cell::Float(v)
        }
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    /// CSV text: floats in scientific notation with 12 significant digits.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.11e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

/// One output row; cells are keyed by column name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    cells: Vec<(&'static str, Cell)>,
}

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn set(&mut self, name: &'static str, value: impl Into<Cell>) -> &mut Self {
        let value = value.into();
        match self.cells.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.cells.push((name, value)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|(n, _)| *n == name).map(|(_, c)| c)
    }

    pub fn float(&self, name: &str) -> Option<f64> {
        match self.get(name) {
            Some(Cell::Float(v)) => Some(*v),
            _ => None,
        }
    }

    fn ordered(&self, columns: &[Column]) -> Vec<Cell> {
        debug_assert!(
            self.cells.iter().all(|(n, _)| columns.iter().any(|c| c.name == *n)),
            "row has cells outside the schema: {:?}",
            self.cells
        );
        columns.iter().map(|c| self.get(c.name).cloned().unwrap_or(Cell::Empty)).collect()
    }
}

pub fn write_csv<W: Write>(out: W, schema: Schema, rows: &[Row]) -> std::io::Result<()> {
    let columns = schema.columns();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns.iter().map(|c| c.name))?;
    for row in rows {
        w.write_record(row.ordered(&columns).iter().map(Cell::to_csv))?;
    }
    w.flush()
}

pub fn write_json<W: Write>(mut out: W, schema: Schema, rows: &[Row]) -> std::io::Result<()> {
    let columns = schema.columns();
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let map: Map<String, Value> = columns
                .iter()
                .zip(row.ordered(&columns))
                .map(|(c, cell)| (c.name.to_owned(), cell.to_json()))
                .collect();
            Value::Object(map)
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &array)?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn write_rows<W: Write>(out: W, format: Format, schema: Schema, rows: &[Row]) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(out, schema, rows),
        Format::Json => write_json(out, schema, rows),
    }
}

/// Checks CSV text against a schema: exact header, field count and per-kind
/// parsing of every cell. Returns the number of data rows.
pub fn validate_csv(text: &str, schema: Schema) -> Result<usize, String> {
    let columns = schema.columns();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    let names: Vec<&str> = columns.iter().map(|c| c.name).collect();
    if header.iter().collect::<Vec<_>>() != names {
        return Err(format!("header {header:?} does not match {names:?}"));
    }
    let mut count = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("row {}: {e}", line + 1))?;
        for (c, field) in columns.iter().zip(record.iter()) {
            check_field(c, field).map_err(|e| format!("row {}, column {}: {e}", line + 1, c.name))?;
        }
        count += 1;
    }
    Ok(count)
}

fn check_field(c: &Column, field: &str) -> Result<(), String> {
    if field.is_empty() {
        return if c.optional { Ok(()) } else { Err("empty".into()) };
    }
    let ok = match c.kind {
        Kind::Int => field.parse::<u64>().is_ok(),
        Kind::Float => is_sci_12(field),
        Kind::Bool => field == "true" || field == "false",
        Kind::Text => true,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("`{field}` is not a valid {:?}", c.kind))
    }
}

/// `-d.ddddddddddde[-]x`: one leading digit, 11 decimals, integer exponent.
fn is_sci_12(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let Some((mantissa, exp)) = body.split_once('e') else {
        return body == "inf";
    };
    let Some((int, frac)) = mantissa.split_once('.') else {
        return false;
    };
    let exp = exp.strip_prefix('-').unwrap_or(exp);
    int.len() == 1
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.len() == 11
        && frac.bytes().all(|b| b.is_ascii_digit())
        && !exp.is_empty()
        && exp.bytes().all(|b| b.is_ascii_digit())
}
