//! Plain-text result tables.
//!
//! Numbers are written as `{:.16e}` (17 significant digits, enough to
//! round-trip any `f64`), rows end in `\n`, and a missing value is an empty
//! field.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{SweepResult, WaveRow, SWEEP_COLUMNS};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sweep table: header plus one row per ε. A failed row keeps its ε and
/// leaves the metric fields empty.
pub fn format_sweep_csv(result: &SweepResult) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for row in &result.rows {
        out.push_str(&num(row.epsilon));
        for name in &SWEEP_COLUMNS[1..] {
            out.push(',');
            if let Some(x) = row.metrics().and_then(|m| m.get(name)) {
                out.push_str(&num(x));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, format_sweep_csv(result)).map_err(|e| Error::io(path, e))
}

pub fn format_wave_csv(rows: &[WaveRow]) -> String {
    let mut out = String::from("epsilon,analytic,numeric\n");
    for row in rows {
        out.push_str(&num(row.epsilon));
        match row.values {
            Ok((a, b)) => {
                let _ = write!(out, ",{},{}", num(a), num(b));
            }
            Err(_) => out.push_str(",,"),
        }
        out.push('\n');
    }
    out
}

/// Generic two-or-more column table with a header.
pub fn format_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&x| num(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// `(first column, named column)` pairs of a CSV file; rows whose named
/// field is empty are skipped.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_column(&text, column).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_column(text: &str, column: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let idx = names
        .iter()
        .position(|&h| h == column)
        .ok_or_else(|| format!("no column {column:?}; columns are {}", names.join(", ")))?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = |j: usize| -> std::result::Result<Option<f64>, String> {
            match fields.get(j) {
                None | Some(&"") => Ok(None),
                Some(s) => s
                    .parse()
                    .map(Some)
                    .map_err(|_| format!("line {}: cannot read {s:?}", i + 2)),
            }
        };
        if let (Some(x), Some(y)) = (field(0)?, field(idx)?) {
            out.push((x, y));
        }
    }
    Ok(out)
}
