//! Convergence history as CSV.
//!
//! One header row with [`IterationRecord::COLUMNS`], then one row per outer
//! iteration. Numbers use Rust's shortest round-trip formatting, so reading
//! a file back reproduces the records bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{History, IterationRecord};
use crate::error::OutputError;

pub fn history_csv(records: &[IterationRecord]) -> String {
    let mut out = IterationRecord::COLUMNS.join(",");
    out.push('\n');
    for r in records {
        write!(out, "{}", r.iteration).unwrap();
        for v in r.values() {
            write!(out, ",{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_history_csv(text: &str, origin: &Path) -> Result<History, OutputError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| OutputError::format(origin, "empty history file"))?;
    if header != IterationRecord::COLUMNS.join(",") {
        return Err(OutputError::format(origin, "unexpected history header"));
    }
    let mut h = History::default();
    for (n, line) in lines.enumerate() {
        let bad = |what: &str| OutputError::format(origin, format!("row {}: {what}", n + 1));
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != IterationRecord::COLUMNS.len() {
            return Err(bad("wrong number of columns"));
        }
        let iteration = cells[0].parse().map_err(|_| bad("bad iteration"))?;
        let mut v = [0.0; 9];
        for (x, c) in v.iter_mut().zip(&cells[1..]) {
            *x = c.parse().map_err(|_| bad("bad number"))?;
        }
        h.push(IterationRecord::from_values(iteration, v));
    }
    Ok(h)
}

/// Writes the raw history to `path`.
pub fn write_history(history: &History, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    std::fs::write(path, history_csv(&history.records)).map_err(|e| OutputError::io(path, e))
}

/// Writes the history divided by its first record to `path`.
pub fn write_relative_history(history: &History, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    std::fs::write(path, history_csv(&history.relative())).map_err(|e| OutputError::io(path, e))
}

pub fn read_history(path: impl AsRef<Path>) -> Result<History, OutputError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| OutputError::io(path, e))?;
    parse_history_csv(&text, path)
}
