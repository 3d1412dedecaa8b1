//! CSV output: comma separated, header row, '.' decimal separator, UTF-8,
//! LF line endings, written to a file or standard output.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: Vec<S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: Vec<S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        debug_assert_eq!(row.len(), self.headers.len(), "ragged CSV row");
        self.rows.push(row);
    }

    /// Writes the table to `output` when given, standard output otherwise.
    pub fn write(&self, output: Option<&Path>) -> Result<()> {
        match output {
            Some(path) => {
                let file = std::fs::File::create(path)
                    .with_context(|| format!("cannot create {}", path.display()))?;
                self.write_to(file)
            }
            None => self.write_to(std::io::stdout().lock()),
        }
    }

    fn write_to(&self, sink: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(&self.headers)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal for a float; infinities print as inf/-inf.
pub fn num(value: f64) -> String {
    value.to_string()
}
