//! Text formats.
//!
//! Margins files hold two lines, `r: 3 1 2` and `c: 2 2 2`. Blank lines and
//! lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use tablecount_core::maxent::MaxEntSolution;
use tablecount_core::sis::SampledTable;
use tablecount_core::Margins;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: expected `r:` or `c:`")]
    UnknownLine { line: usize },
    #[error("line {line}: `{token}` is not a non-negative integer")]
    BadInteger { line: usize, token: String },
    #[error("`{0}:` appears twice")]
    Duplicate(char),
    #[error("missing `{0}:` line")]
    Missing(char),
    #[error(transparent)]
    Margins(#[from] tablecount_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn parse_margins(text: &str) -> Result<Margins, FormatError> {
    let mut rows: Option<Vec<u64>> = None;
    let mut cols: Option<Vec<u64>> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(':').ok_or(FormatError::UnknownLine { line: k + 1 })?;
        let slot = match key.trim() {
            "r" => &mut rows,
            "c" => &mut cols,
            _ => return Err(FormatError::UnknownLine { line: k + 1 }),
        };
        if slot.is_some() {
            return Err(FormatError::Duplicate(key.trim().chars().next().unwrap_or('?')));
        }
        let values = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<u64>().map_err(|_| FormatError::BadInteger {
                    line: k + 1,
                    token: t.to_string(),
                })
            })
            .collect::<Result<Vec<u64>, _>>()?;
        *slot = Some(values);
    }
    let rows = rows.ok_or(FormatError::Missing('r'))?;
    let cols = cols.ok_or(FormatError::Missing('c'))?;
    Ok(Margins::new(&rows, &cols)?)
}

pub fn format_margins(margins: &Margins) -> String {
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    format!("r: {}\nc: {}\n", join(margins.rows()), join(margins.cols()))
}

pub fn read_margins(path: &Path) -> Result<Margins, FormatError> {
    parse_margins(&fs::read_to_string(path)?)
}

/// One table per line, row-major, space separated.
pub fn format_table(table: &SampledTable) -> String {
    table.entries.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_tables<'a, W: Write>(out: &mut W, tables: impl IntoIterator<Item = &'a SampledTable>) -> std::io::Result<()> {
    for t in tables {
        writeln!(out, "{}", format_table(t))?;
    }
    Ok(())
}

/// `Z` as CSV, one matrix row per line.
pub fn z_csv(solution: &MaxEntSolution) -> String {
    let mut s = String::new();
    for i in 0..solution.m() {
        let row: Vec<String> = (0..solution.n()).map(|j| format!("{:.17e}", solution.z(i, j))).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}
