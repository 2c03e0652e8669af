use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

/// Bumped whenever a report field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// A rendered report: always JSON, plus a flat table for commands that have one.
pub struct Report {
    json: String,
    table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

impl Report {
    pub fn new<T: Serialize>(body: &T, table: Option<Table>) -> Result<Self, CliError> {
        let mut json = serde_json::to_string_pretty(body)?;
        json.push('\n');
        Ok(Self { json, table })
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => Ok(self.json.clone().into_bytes()),
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => Err(CliError::Usage("this command has no CSV form; use --format json".into())),
            },
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        write_bytes(&bytes, out)
    }
}

pub fn write_bytes(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|source| CliError::File { path: path.into(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
