//! Loosely typed tables read from CSV or JSONL files.
//!
//! CSV cells arrive as strings and JSONL cells as JSON values; the accessors
//! below accept either representation.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub type Row = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Jsonl,
}

impl TableFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        match ext.as_str() {
            "csv" => Ok(TableFormat::Csv),
            "jsonl" | "ndjson" | "json" => Ok(TableFormat::Jsonl),
            _ => Err(Error::Config(format!(
                "cannot infer table format of {} (expected .csv or .jsonl)",
                path.display()
            ))),
        }
    }
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "jsonl" | "ndjson" => Ok(TableFormat::Jsonl),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

pub fn read_table(path: &Path) -> Result<Vec<Row>> {
    let format = TableFormat::from_path(path)?;
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    match format {
        TableFormat::Csv => read_csv(file),
        TableFormat::Jsonl => read_jsonl(BufReader::new(file)),
    }
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<Row>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = headers
            .iter()
            .zip(record.iter())
            .map(|(h, v)| (h.to_string(), Value::String(v.to_string())))
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(&line)? {
            Value::Object(map) => rows.push(map),
            _ => {
                return Err(Error::InvalidRecord(format!(
                    "line {}: expected a JSON object",
                    lineno + 1
                )))
            }
        }
    }
    Ok(rows)
}

fn missing(col: &str) -> Error {
    Error::InvalidRecord(format!("missing column {col:?}"))
}

/// Text of a cell; numbers are rendered, null and absent cells are empty.
pub fn cell_str(row: &Row, col: &str) -> String {
    match row.get(col) {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
    }
}

/// Numeric cell; empty, null, `nan` and `inf` text map to `None`.
pub fn cell_f64(row: &Row, col: &str) -> Result<Option<f64>> {
    match row.get(col) {
        None => Err(missing(col)),
        Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(Value::Bool(b)) => Ok(Some(f64::from(u8::from(*b)))),
        Some(Value::String(s)) => {
            let t = s.trim();
            if t.is_empty() || t.eq_ignore_ascii_case("null") || t.eq_ignore_ascii_case("none") {
                return Ok(None);
            }
            let x: f64 = t.parse().map_err(|_| {
                Error::InvalidRecord(format!("column {col:?}: {t:?} is not a number"))
            })?;
            Ok(x.is_finite().then_some(x))
        }
        Some(v) => Err(Error::InvalidRecord(format!(
            "column {col:?}: unexpected value {v}"
        ))),
    }
}

pub fn cell_required_f64(row: &Row, col: &str) -> Result<f64> {
    cell_f64(row, col)?.ok_or_else(|| Error::InvalidRecord(format!("column {col:?} is empty")))
}

pub fn cell_integer(row: &Row, col: &str) -> Result<Option<i64>> {
    match cell_f64(row, col)? {
        Some(x) if x.fract() == 0.0 => Ok(Some(x as i64)),
        Some(x) => Err(Error::InvalidRecord(format!(
            "column {col:?}: {x} is not an integer"
        ))),
        None => Ok(None),
    }
}

fn cell_array(row: &Row, col: &str) -> Result<Vec<Value>> {
    match row.get(col) {
        None => Err(missing(col)),
        Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => Ok(items.clone()),
        Some(Value::String(s)) => {
            let t = s.trim();
            if t.is_empty() {
                return Ok(Vec::new());
            }
            if let Ok(Value::Array(items)) = serde_json::from_str(t) {
                return Ok(items);
            }
            // Python-style reprs of string lists use single quotes
            if let Ok(Value::Array(items)) = serde_json::from_str(&t.replace('\'', "\"")) {
                return Ok(items);
            }
            if t.starts_with('[') {
                return Err(Error::InvalidRecord(format!(
                    "column {col:?}: malformed list {t:?}"
                )));
            }
            Ok(vec![Value::String(t.to_string())])
        }
        Some(v) => Ok(vec![v.clone()]),
    }
}

pub fn cell_str_list(row: &Row, col: &str) -> Result<Vec<String>> {
    Ok(cell_array(row, col)?
        .into_iter()
        .map(|v| match v {
            Value::String(s) => s,
            other => other.to_string(),
        })
        .collect())
}

pub fn cell_f64_list(row: &Row, col: &str) -> Result<Vec<f64>> {
    cell_array(row, col)?
        .into_iter()
        .map(|v| match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::InvalidRecord(format!("column {col:?}: bad number"))),
            Value::String(s) => s.trim().parse().map_err(|_| {
                Error::InvalidRecord(format!("column {col:?}: {s:?} is not a number"))
            }),
            other => Err(Error::InvalidRecord(format!(
                "column {col:?}: unexpected element {other}"
            ))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells_are_parsed_lazily() {
        let rows = read_csv("a,b,c\n1.5,\"[1, 2]\",\n".as_bytes()).unwrap();
        assert_eq!(cell_f64(&rows[0], "a").unwrap(), Some(1.5));
        assert_eq!(cell_f64_list(&rows[0], "b").unwrap(), vec![1.0, 2.0]);
        assert_eq!(cell_f64(&rows[0], "c").unwrap(), None);
        assert!(cell_f64(&rows[0], "d").is_err());
    }

    #[test]
    fn jsonl_values() {
        let rows = read_jsonl(
            "{\"a\": 3, \"l\": [\"x\", \"y\"]}\n\n{\"a\": null, \"l\": []}\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(cell_integer(&rows[0], "a").unwrap(), Some(3));
        assert_eq!(cell_str_list(&rows[0], "l").unwrap(), vec!["x", "y"]);
        assert_eq!(cell_integer(&rows[1], "a").unwrap(), None);
    }

    #[test]
    fn python_style_lists() {
        let rows = read_csv("l\n\"['Fiction', 'Sea stories']\"\n".as_bytes()).unwrap();
        assert_eq!(
            cell_str_list(&rows[0], "l").unwrap(),
            vec!["Fiction", "Sea stories"]
        );
    }
}
