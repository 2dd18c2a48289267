//! Minimal CSV tables: UTF-8, comma-separated, one header row, `.` decimal
//! point, no quoting (cells never contain commas here).
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a written file recovers every value bit-for-bit.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// An in-memory CSV table: a header row plus string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        Table {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Column index for `name`.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// Parses cell `(row, col)` as `f64`.
    pub fn number(&self, row: usize, col: usize) -> Result<f64> {
        let cell = &self.rows[row][col];
        cell.parse::<f64>().map_err(|_| Error::CsvParse {
            line: row + 2, // 1-based, after the header
            message: format!("expected a number in column {}, got {cell:?}", self.headers[col]),
        })
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{}", self.headers.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut buf = std::io::BufWriter::new(file);
        self.write_to(&mut buf)?;
        buf.flush()?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header_line = lines.next().ok_or(Error::CsvParse {
            line: 1,
            message: "empty document".into(),
        })?;
        let headers: Vec<String> = header_line.split(',').map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<String> = line.split(',').map(str::to_owned).collect();
            if row.len() != headers.len() {
                return Err(Error::CsvParse {
                    line: i + 2,
                    message: format!("expected {} cells, got {}", headers.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Table { headers, rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// Shortest representation of `x` that parses back to the same bits.
/// Extreme magnitudes switch to scientific notation to stay readable.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_floats_exactly() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        let values = [
            0.1,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            -1.2345678901234567e300,
            3.810359828248327e-88,
            -0.0,
            f64::NAN,
        ];
        for &v in &values {
            t.push_row(vec![format_f64(v), "x".into()]);
        }
        let mut out = Vec::new();
        t.write_to(&mut out).unwrap();
        let back = Table::parse(std::str::from_utf8(&out).unwrap()).unwrap();
        for (i, &v) in values.iter().enumerate() {
            let parsed = back.number(i, 0).unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits(), "value {v}");
        }
    }

    #[test]
    fn ragged_row_is_reported_with_line_number() {
        let err = Table::parse("a,b\n1,2\n3\n").unwrap_err();
        match err {
            Error::CsvParse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
