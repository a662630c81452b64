//! Plain-text CSV helpers shared by the CLI and the bindings.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), `.` as the
//! decimal separator and `\n` line endings, so files round-trip exactly.

use std::fmt::Write as _;

use thiserror::Error;

use crate::spectral::{PeriodicGrid, RealField, SpectralError};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("empty CSV input")]
    Empty,
    #[error("expected header {expected:?}, found {found:?}")]
    Header {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Columns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse {text:?} as a number")]
    Number { line: usize, text: String },
    #[error("nodes do not form a uniform periodic grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Field(#[from] SpectralError),
}

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render named columns of equal length as CSV text.
pub fn columns_to_csv(headers: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(headers.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = String::with_capacity(rows * columns.len() * 24 + 64);
    out.push_str(&headers.join(","));
    out.push('\n');
    for i in 0..rows {
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(col[i]));
        }
        out.push('\n');
    }
    out
}

/// Parse CSV text with a known header into columns.
pub fn csv_to_columns(text: &str, headers: &[&str]) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(CsvError::Empty)?;
    let found: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
    if found != headers {
        return Err(CsvError::Header {
            expected: headers.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    let mut cols = vec![Vec::new(); headers.len()];
    for (i, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != headers.len() {
            return Err(CsvError::Columns {
                line: i + 1,
                expected: headers.len(),
                found: cells.len(),
            });
        }
        for (col, cell) in cols.iter_mut().zip(cells) {
            let v: f64 = cell.trim().parse().map_err(|_| CsvError::Number {
                line: i + 1,
                text: cell.to_string(),
            })?;
            col.push(v);
        }
    }
    Ok(cols)
}

/// Recover the grid from a column of node coordinates.
pub fn grid_from_nodes(x: &[f64]) -> Result<PeriodicGrid, CsvError> {
    if x.len() < 2 {
        return Err(CsvError::Grid("fewer than two nodes".into()));
    }
    let h = x[1] - x[0];
    let half_length = -x[0];
    let grid =
        PeriodicGrid::new(half_length, x.len()).map_err(|e| CsvError::Grid(e.to_string()))?;
    let tol = 1e-9 * half_length.max(1.0);
    if (grid.spacing() - h).abs() > tol
        || x.iter()
            .enumerate()
            .any(|(j, &xj)| (xj - grid.node(j)).abs() > tol)
    {
        return Err(CsvError::Grid("non-uniform spacing".into()));
    }
    Ok(grid)
}

pub fn field_to_csv(f: &RealField) -> String {
    columns_to_csv(&["x", "value"], &[&f.grid().nodes(), f.values()])
}

pub fn field_from_csv(text: &str) -> Result<RealField, CsvError> {
    let cols = csv_to_columns(text, &["x", "value"])?;
    let grid = grid_from_nodes(&cols[0])?;
    Ok(RealField::new(grid, cols[1].clone())?)
}
