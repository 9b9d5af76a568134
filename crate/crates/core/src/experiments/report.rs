use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// First line of every results file; bump when columns change.
pub const CSV_SCHEMA: &str = "# cohesive-phase results v1";

/// One metric of one job.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub subcommand: String,
    /// Parameter echo, `k=v;k=v`.
    pub params: String,
    pub metric: String,
    pub value: f64,
    /// The bound the value is compared with; its direction is part of the
    /// metric's definition.
    pub tolerance: f64,
    pub pass: bool,
    pub wall_time_s: f64,
    pub note: String,
}

impl ResultRow {
    pub fn new(metric: impl Into<String>, value: f64, tolerance: f64, pass: bool) -> Self {
        ResultRow {
            subcommand: String::new(),
            params: String::new(),
            metric: metric.into(),
            value,
            tolerance,
            pass,
            wall_time_s: 0.0,
            note: String::new(),
        }
    }

    /// Passes when `value ≤ bound`.
    pub fn at_most(metric: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(metric, value, bound, value <= bound)
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(metric: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(metric, value, bound, value >= bound)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn with_time(mut self, seconds: f64) -> Self {
        self.wall_time_s = seconds;
        self
    }
}

pub fn write_rows<W: Write>(mut w: W, rows: &[ResultRow]) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA}")?;
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    csv.write_record(["subcommand", "params", "metric", "value", "tolerance", "pass", "wall_time_s", "note"])?;
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_rows(std::io::BufWriter::new(f), rows)
}
