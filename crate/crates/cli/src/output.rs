//! Result tables and their CSV/JSON encodings.
//!
//! CSV files carry a `#`-prefixed preamble (`version`, `timestamp`, and the
//! resolved spec as one-line JSON) followed by a header row. Numbers are
//! written with 17 significant digits so every value parses back exactly.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::spec::{ExperimentSpec, OutputFormat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub version: String,
    /// Seconds since the Unix epoch at which the run started.
    pub timestamp: u64,
    pub spec: ExperimentSpec,
}

impl Metadata {
    pub fn now(spec: ExperimentSpec) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            spec,
        }
    }
}

/// Rows ordered by the first column, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentResult {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ExperimentResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Copy of one column, or `None` if absent.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    pub fn read<R: Read>(format: OutputFormat, input: R) -> Result<Self> {
        match format {
            OutputFormat::Csv => Self::read_csv(input),
            OutputFormat::Json => Self::read_json(input),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# ris-miso experiment result")?;
        writeln!(out, "# version: {}", self.metadata.version)?;
        writeln!(out, "# timestamp: {}", self.metadata.timestamp)?;
        writeln!(
            out,
            "# spec: {}",
            serde_json::to_string(&self.metadata.spec)?
        )?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let (mut version, mut timestamp, mut spec) = (None, None, None);
        let mut line = String::new();
        let mut body = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            let Some(comment) = line.strip_prefix('#') else {
                body.push_str(&line);
                break;
            };
            if let Some((key, value)) = comment.trim().split_once(": ") {
                match key {
                    "version" => version = Some(value.to_string()),
                    "timestamp" => {
                        timestamp =
                            Some(value.parse().map_err(|_| {
                                CliError::Format(format!("bad timestamp {value:?}"))
                            })?)
                    }
                    "spec" => spec = Some(serde_json::from_str(value)?),
                    _ => {}
                }
            }
        }
        reader.read_to_string(&mut body)?;
        let missing = |k: &str| CliError::Format(format!("preamble is missing {k}"));
        let metadata = Metadata {
            version: version.ok_or_else(|| missing("version"))?,
            timestamp: timestamp.ok_or_else(|| missing("timestamp"))?,
            spec: spec.ok_or_else(|| missing("spec"))?,
        };
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| CliError::Format(format!("bad number {v:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self {
            metadata,
            columns,
            rows,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }
}
