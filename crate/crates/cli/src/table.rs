//! Numeric CSV tables with a mandatory header row.
//!
//! Floats are written with the shortest decimal representation that parses
//! back to the same bits ("." separator, "\n" line endings), so
//! parse(serialize(x)) round-trips finite doubles exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::exit::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct DataTable {
    pub columns: Vec<String>,
    /// row-major values, rectangular
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(columns: Vec<String>) -> Self {
        DataTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> CliResult<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Parse(format!("missing column '{name}'")))
    }

    pub fn column(&self, name: &str) -> CliResult<Vec<f64>> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| CliError::Parse(format!("{origin}: empty file")))?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if columns.iter().any(String::is_empty) {
            return Err(CliError::Parse(format!("{origin}:1: empty column name")));
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(CliError::Parse(format!(
                    "{origin}:{}: expected {} cells, found {}",
                    lineno + 1,
                    columns.len(),
                    cells.len()
                )));
            }
            let mut row = Vec::with_capacity(cells.len());
            for (col, cell) in cells.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    CliError::Parse(format!(
                        "{origin}:{}: column {} ('{}'): not a number: '{}'",
                        lineno + 1,
                        col + 1,
                        columns[col],
                        cell
                    ))
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        Ok(DataTable { columns, rows })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }
}

/// Write a file atomically: stage into a sibling temp file, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let tmp = path.with_extension("tmp-write");
    std::fs::write(&tmp, contents).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Write a table to `path`, or to stdout when the path is "-".
pub fn emit_table(table: &DataTable, path: &str) -> CliResult<()> {
    let text = table.serialize();
    if path == "-" {
        print!("{text}");
        Ok(())
    } else {
        write_atomic(Path::new(path), &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bitwise() {
        let mut t = DataTable::new(vec!["a".into(), "b".into()]);
        t.push_row(vec![0.1, 1.0 / 3.0]);
        t.push_row(vec![f64::MIN_POSITIVE, 1e300]);
        t.push_row(vec![-0.0, 123456.789012345678]);
        let parsed = DataTable::parse(&t.serialize(), "mem").unwrap();
        for (r1, r2) in t.rows.iter().zip(&parsed.rows) {
            for (a, b) in r1.iter().zip(r2) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn header_only_is_valid_and_empty() {
        let t = DataTable::parse("x,y\n", "mem").unwrap();
        assert_eq!(t.columns, vec!["x", "y"]);
        assert!(t.rows.is_empty());
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let err = DataTable::parse("x,y\n1,2\n3,zap\n", "mem").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mem:3"), "{msg}");
        assert!(msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn missing_column_is_named() {
        let t = DataTable::parse("x,y\n1,2\n", "mem").unwrap();
        let err = t.column("frequency_mhz").unwrap_err();
        assert!(err.to_string().contains("frequency_mhz"));
    }
}
