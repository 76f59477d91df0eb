use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};

pub const TOOL: &str = "quantizer";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rows for CSV output; cells are already formatted.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows
            .push(row.into_iter().map(|c| c.to_string()).collect());
    }
}

pub struct Report {
    /// The identity or formula the command evaluates.
    pub anchor: &'static str,
    pub pass: bool,
    pub result: Value,
    pub table: Table,
}

#[derive(Serialize)]
struct Artifact<'a> {
    tool: &'static str,
    version: &'static str,
    anchor: &'static str,
    config: &'a RunConfig,
    pass: bool,
    result: &'a Value,
}

pub fn render(report: &Report, config: &RunConfig) -> anyhow::Result<Vec<u8>> {
    match config.common.format {
        Format::Json => {
            let artifact = Artifact {
                tool: TOOL,
                version: VERSION,
                anchor: report.anchor,
                config,
                pass: report.pass,
                result: &report.result,
            };
            let mut out = serde_json::to_vec_pretty(&artifact)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "# tool: {TOOL} {VERSION}")?;
            writeln!(out, "# anchor: {}", report.anchor)?;
            writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
            writeln!(out, "# pass: {}", report.pass)?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&report.table.header)?;
            for row in &report.table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            drop(w);
            Ok(out)
        }
    }
}
