use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::ValueEnum;
use serde::Serialize;

pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A header plus rows of already formatted cells.
pub struct Table {
    pub schema: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, header: &[&str]) -> Self {
        Self {
            schema,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner()?)
    }
}

/// One emitted artefact: a table for CSV output and a value for JSON output.
pub struct Artifact {
    pub stem: String,
    pub table: Table,
    pub json: serde_json::Value,
}

impl Artifact {
    pub fn new(stem: impl Into<String>, table: Table, json: serde_json::Value) -> Self {
        Self {
            stem: stem.into(),
            table,
            json,
        }
    }

    fn render(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.json)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub path: PathBuf,
    pub format: Format,
    pub schema: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub subcommand: &'static str,
    pub scenario: Option<String>,
    pub specs: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub csv_schema_version: u32,
    pub outputs: Vec<OutputEntry>,
    pub wall_time_secs: f64,
}

/// Where results go and what was run, for the manifest.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub subcommand: &'static str,
    pub scenario: Option<String>,
    pub specs: Vec<String>,
    pub seed: Option<u64>,
    pub started: Instant,
}

impl Sink {
    /// Prints artefacts to stdout, or writes them plus a manifest to the
    /// output directory.
    pub fn emit(&self, artifacts: &[Artifact]) -> anyhow::Result<()> {
        let Some(dir) = &self.out else {
            let mut stdout = std::io::stdout().lock();
            for (i, a) in artifacts.iter().enumerate() {
                if i > 0 {
                    writeln!(stdout)?;
                }
                stdout.write_all(&a.render(self.format)?)?;
            }
            return Ok(());
        };
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut outputs = Vec::with_capacity(artifacts.len());
        for a in artifacts {
            let path = dir.join(format!("{}.{}", a.stem, self.format.extension()));
            write_file(&path, &a.render(self.format)?)?;
            outputs.push(OutputEntry {
                path,
                format: self.format,
                schema: format!("{}/v{CSV_SCHEMA_VERSION}", a.table.schema),
            });
        }
        let manifest = RunManifest {
            command: std::env::args().collect(),
            subcommand: self.subcommand,
            scenario: self.scenario.clone(),
            specs: self.specs.clone(),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            csv_schema_version: CSV_SCHEMA_VERSION,
            outputs,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_file(&dir.join("manifest.json"), &bytes)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Shortest round-trip form, with an exponent for very small or large values.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:?}")
    }
}
