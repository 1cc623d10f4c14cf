use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use sepcert::io::sig9;
use sepcert::{Error, Result};
use serde_json::Value;

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            Box::new(io::BufWriter::new(File::create(p).map_err(|e| {
                Error::InvalidArgument(format!("cannot create {}: {e}", p.display()))
            })?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json(out: Option<&Path>, v: &Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sig9(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
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

pub fn write_csv(out: Option<&Path>, header: &[String], rows: &[Vec<Cell>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    let csv_err = |e: csv::Error| Error::Io(io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        w.write_record(r.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
