//! Deterministic CSV emission: comma separation, header row, LF endings,
//! full double precision (17 significant digits) so runs can be diffed
//! byte-for-byte across implementations.

use std::io::Write;
use std::path::Path;

use crate::CliError;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    rows: Vec<String>,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        Self {
            rows: vec![header.join(",")],
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        self.rows
            .push(values.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(","));
    }

    /// Row with a leading pre-formatted cell (labels, booleans).
    pub fn labeled_row(&mut self, label: &str, values: &[f64]) {
        let mut cells = vec![label.to_string()];
        cells.extend(values.iter().map(|&v| fmt(v)));
        self.rows.push(cells.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(CliError::Io)?;
        }
        let mut file = std::fs::File::create(path).map_err(CliError::Io)?;
        for row in &self.rows {
            file.write_all(row.as_bytes()).map_err(CliError::Io)?;
            file.write_all(b"\n").map_err(CliError::Io)?;
        }
        Ok(())
    }
}
