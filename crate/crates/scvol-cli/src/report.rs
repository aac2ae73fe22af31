//! Report plumbing: every subcommand emits one JSON report embedding the
//! resolved configuration and the library version, plus an optional CSV
//! table for external plotting. Reports carry no timestamps or
//! environment state, so a re-run of the same config is byte-identical.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::Path;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECKED_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub version: &'static str,
    pub config: Value,
    pub result: Value,
}

impl Report {
    pub fn new(command: &'static str, config: impl Serialize, result: impl Serialize) -> Result<Self> {
        Ok(Report {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: serde_json::to_value(config)?,
            result: serde_json::to_value(result)?,
        })
    }

    pub fn render(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Print to stdout and optionally write to a file.
    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let text = self.render()?;
        print!("{text}");
        if let Some(path) = out {
            std::fs::write(path, &text).with_context(|| format!("writing report {path:?}"))?;
        }
        Ok(())
    }
}

/// Write a CSV table (header + float rows, full round-trip precision).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    std::fs::write(path, out).with_context(|| format!("writing table {path:?}"))?;
    Ok(())
}

/// Exit code for a library error: numeric failures are 3, everything else
/// is a usage-class error.
pub fn classify_core_error(err: &scvol_core::Error) -> i32 {
    match err {
        scvol_core::Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}
