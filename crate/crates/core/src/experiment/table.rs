//! Sweep tables and their CSV / JSON encodings.
//!
//! CSV layout: `# key=value` metadata lines, one header line, then one row per
//! grid point. The last column is always `flags` (`;`-separated). Numbers are
//! written with 17 significant digits; absent values are empty cells.

use super::config::OutputFormat;
use crate::error::{Result, SccError};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

pub const FLAGS_COLUMN: &str = "flags";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cells: Vec<Cell>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// File stem of the written table.
    pub name: String,
    pub metadata: Vec<(String, String)>,
    /// Data columns, without the trailing `flags` column.
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>, flags: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(SweepRow { cells, flags });
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column; `None` for empty or text cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.cells[i].as_f64()).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            if k.contains(['\n', '=']) || v.contains('\n') {
                return Err(SccError::Io(format!(
                    "metadata entry {k:?} cannot be written"
                )));
            }
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header: Vec<&str> = self
            .columns
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(FLAGS_COLUMN))
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.cells.iter().map(Cell::csv_text).collect();
            rec.push(row.flags.join(";"));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| SccError::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| SccError::Io(e.to_string()))?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let config: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(&r.cells)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect();
                m.insert(
                    FLAGS_COLUMN.into(),
                    Value::Array(r.flags.iter().cloned().map(Value::String).collect()),
                );
                Value::Object(m)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("config".into(), Value::Object(config));
        doc.insert("rows".into(), Value::Array(rows));
        serde_json::to_string_pretty(&Value::Object(doc))
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| SccError::Io(e.to_string()))
    }

    /// Writes `<dir>/<name>.<ext>`, creating `dir` if needed.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        let text = match format {
            OutputFormat::Csv => self.to_csv()?,
            OutputFormat::Json => self.to_json()?,
        };
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

fn csv_err(e: csv::Error) -> SccError {
    SccError::Io(format!("csv: {e}"))
}

fn parse_err(msg: String) -> SccError {
    SccError::Config(format!("read_sweep_csv: {msg}"))
}

/// Reads a table written by [`SweepTable::to_csv`]. The table name is left
/// empty.
pub fn read_sweep_csv(text: &str) -> Result<SweepTable> {
    let mut metadata = Vec::new();
    let mut body_start = text.len();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if let Some(rest) = line.strip_prefix('#') {
            let entry = rest.trim();
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| parse_err(format!("metadata line {entry:?} is not key=value")))?;
            metadata.push((
                k.trim().to_string(),
                v.trim_end_matches(['\r', '\n']).to_string(),
            ));
            offset += line.len();
        } else {
            body_start = offset;
            break;
        }
    }
    let body = &text[body_start.min(text.len())..];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(body.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .clone();
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    if names.last().map(String::as_str) != Some(FLAGS_COLUMN) {
        return Err(parse_err(format!("last column must be `{FLAGS_COLUMN}`")));
    }
    let columns = names[..names.len() - 1].to_vec();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        if rec.len() != names.len() {
            return Err(parse_err(format!(
                "row has {} cells, header has {}",
                rec.len(),
                names.len()
            )));
        }
        let cells = rec
            .iter()
            .take(columns.len())
            .map(|c| {
                if c.is_empty() {
                    Cell::Empty
                } else if let Ok(v) = c.parse::<f64>() {
                    Cell::Num(v)
                } else {
                    Cell::Text(c.to_string())
                }
            })
            .collect();
        let flag_text = rec.get(columns.len()).unwrap_or("");
        let flags = if flag_text.is_empty() {
            Vec::new()
        } else {
            flag_text.split(';').map(str::to_string).collect()
        };
        rows.push(SweepRow { cells, flags });
    }
    Ok(SweepTable {
        name: String::new(),
        metadata,
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepTable {
        let mut t = SweepTable::new("demo", &["phi", "value", "kind"]);
        t.metadata.push(("q".into(), "1.3333333333333333".into()));
        t.push(vec![0.0.into(), (1.0 / 3.0).into(), "free".into()], vec![]);
        t.push(
            vec![0.5.into(), Cell::Empty, "quasifree".into()],
            vec!["fringe_extremum".into(), "step_sensitive".into()],
        );
        t
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let text = t.to_csv().unwrap();
        assert!(text.starts_with("# q=1.3333333333333333\nphi,value,kind,flags\n"));
        assert!(text.contains("3.3333333333333331e-1"));
        let back = read_sweep_csv(&text).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.meta("q"), Some("1.3333333333333333"));
    }

    #[test]
    fn json_has_config_and_rows() {
        let v: Value = serde_json::from_str(&sample().to_json().unwrap()).unwrap();
        assert_eq!(v["config"]["q"], "1.3333333333333333");
        assert_eq!(v["rows"][1]["value"], Value::Null);
        assert_eq!(v["rows"][1]["flags"][0], "fringe_extremum");
    }

    #[test]
    fn reader_rejects_bad_input() {
        assert!(read_sweep_csv("# no equals sign\na,flags\n").is_err());
        assert!(read_sweep_csv("a,b\n1,2\n").is_err());
        assert!(read_sweep_csv("a,flags\n1,,3\n").is_err());
        assert!(read_sweep_csv("").is_err());
    }
}
