//! CSV tables with a `#` provenance header.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { header: Vec::new(), notes: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.header.push((key.into(), value.to_string()));
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    #[cfg(test)]
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Renders the table; fails if any cell is not finite.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k} = {v}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(CliError::Check(format!(
                    "row {i}, column '{}' is not finite ({})",
                    self.columns[j], row[j]
                )));
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = self.to_csv()?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// Parses text produced by [`Table::to_csv`]. `#` lines of the form
    /// `key = value` become header entries, other `#` lines notes.
    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut t = Table::new(Vec::new());
        let mut have_columns = false;
        for (i, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                match rest.split_once(" = ") {
                    Some((k, v)) if !k.contains(' ') => t.meta(k, v),
                    _ => t.note(rest),
                }
            } else if line.trim().is_empty() {
                continue;
            } else if !have_columns {
                t.columns = line.split(',').map(str::to_owned).collect();
                have_columns = true;
            } else {
                let row = line
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Io(format!("line {}: {e}", i + 1)))?;
                if row.len() != t.columns.len() {
                    return Err(CliError::Io(format!("line {}: {} cells, expected {}", i + 1, row.len(), t.columns.len())));
                }
                t.rows.push(row);
            }
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = Table::new(vec!["x".into(), "y".into()]);
        t.meta("seed", 7);
        t.note("free text: here");
        t.push(vec![0.1, 1.0 / 3.0]);
        t.push(vec![-2.5e-300, 6.02e23]);
        let back = Table::parse(&t.to_csv().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn non_finite_cells_are_refused() {
        let mut t = Table::new(vec!["x".into()]);
        t.push(vec![f64::NAN]);
        assert!(matches!(t.to_csv(), Err(CliError::Check(_))));
    }
}
