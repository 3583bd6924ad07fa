//! Bit-stable tables: fixed column order, 17 significant digits, LF line endings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nhsense::metrology::FisherRecord;

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits in scientific notation, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Float(x) => fmt_float(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => s.clone(),
                    Cell::Empty => String::new(),
                })
                .collect();
            w.write_record(&fields).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    /// Array of objects; floats written with the same 17 digits, non-finite values as null.
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = String::from("[\n");
        for (r, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (i, (k, c)) in self.header.iter().zip(row).enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                match c {
                    Cell::Float(x) if x.is_finite() => out.push_str(&fmt_float(*x)),
                    Cell::Float(_) | Cell::Empty => out.push_str("null"),
                    Cell::Int(i) => out.push_str(&i.to_string()),
                    Cell::Text(s) => out.push_str(&serde_json::to_string(s).unwrap()),
                }
            }
            out.push('}');
            if r + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out.into_bytes()
    }
}

pub const FISHER_HEADER: [&str; 9] =
    ["model", "lambda", "L", "selector", "F_Q", "F_C", "fd_step", "gauge_overlap", "flags"];

pub fn fisher_table(records: &[FisherRecord]) -> Table {
    let mut t = Table::new(&FISHER_HEADER);
    for r in records {
        t.push(vec![
            r.model.clone().into(),
            r.lambda.into(),
            r.size.into(),
            r.selector.clone().into(),
            r.f_q.into(),
            r.f_c.into(),
            r.fd_step.into(),
            r.gauge_overlap.into(),
            r.flags().into(),
        ]);
    }
    t
}

pub fn curve_table(points: &[nhsense::C64]) -> Table {
    let mut t = Table::new(&["index", "re", "im"]);
    for (i, z) in points.iter().enumerate() {
        t.push(vec![i.into(), z.re.into(), z.im.into()]);
    }
    t
}

/// Writes `table` to `dir/stem.{csv,json}` and returns the path.
pub fn export_table(table: &Table, dir: &Path, stem: &str, format: Format) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    let bytes = match format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json(),
    };
    let mut f = fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(&bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
