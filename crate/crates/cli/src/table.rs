//! Small tabular emitter: CSV by default, JSON when the target path ends in
//! `.json`. Headers are part of the stable CLI contract.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::UInt(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(v) => {
                debug_assert!(!v.contains([',', '"', '\n']), "cell needs escaping: {v}");
                write!(f, "{v}")
            }
            Cell::Bool(v) => write!(f, "{v}"),
        }
    }
}

impl Cell {
    fn json(&self) -> String {
        match self {
            Cell::Text(v) => format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\"")),
            other => other.to_string(),
        }
    }
}

pub struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Table {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.headers.len(), "ragged table row");
        self.rows.push(cells);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.headers.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "[")?;
        for (i, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self
                .headers
                .iter()
                .zip(row)
                .map(|(h, c)| format!("\"{h}\": {}", c.json()))
                .collect();
            let comma = if i + 1 < self.rows.len() { "," } else { "" };
            writeln!(w, "  {{{}}}{comma}", fields.join(", "))?;
        }
        writeln!(w, "]")
    }

    /// Write to the path (JSON if it ends in .json, CSV otherwise), or CSV
    /// to stdout when no path is given.
    pub fn emit(&self, out: Option<&Path>) -> io::Result<()> {
        match out {
            None => self.write_csv(io::stdout().lock()),
            Some(path) => {
                let file = BufWriter::new(File::create(path)?);
                if path.extension().is_some_and(|e| e == "json") {
                    self.write_json(file)
                } else {
                    self.write_csv(file)
                }
            }
        }
    }
}
