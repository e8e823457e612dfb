use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::CliError;
use crate::harness::{Checkpoint, PanelResult, TrialRecord};

pub const CSV_HEADER: [&str; 8] =
    ["trial", "total_samples", "s_size", "r_size", "s_tp", "s_fp", "r_tp", "r_fp"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvRow {
    pub trial: u64,
    pub total_samples: u64,
    pub s_size: u32,
    pub r_size: u32,
    pub s_tp: u32,
    pub s_fp: u32,
    pub r_tp: u32,
    pub r_fp: u32,
}

impl CsvRow {
    fn new(trial: u64, c: &Checkpoint) -> Self {
        CsvRow {
            trial,
            total_samples: c.total_samples,
            s_size: c.s_size(),
            r_size: c.r_size(),
            s_tp: c.s_tp,
            s_fp: c.s_fp,
            r_tp: c.r_tp,
            r_fp: c.r_fp,
        }
    }
}

/// One row per (trial, checkpoint), sorted by trial then sample count.
pub fn write_csv<W: Write>(writer: W, records: &[TrialRecord]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.trial);
    for r in sorted {
        for c in &r.checkpoints {
            w.serialize(CsvRow::new(r.trial, c))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parses a CSV written by [`write_csv`] back into per-trial records.
/// Seeds are not stored in the CSV and come back as zero.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<TrialRecord>, CliError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(CliError::Schema(format!("unexpected header {header:?}")));
    }
    let mut records: Vec<TrialRecord> = Vec::new();
    for row in rdr.deserialize() {
        let row: CsvRow = row?;
        if row.s_size != row.s_tp + row.s_fp || row.r_size != row.r_tp + row.r_fp {
            return Err(CliError::Schema(format!("inconsistent set sizes in {row:?}")));
        }
        let cp = Checkpoint {
            total_samples: row.total_samples,
            s_tp: row.s_tp,
            s_fp: row.s_fp,
            r_tp: row.r_tp,
            r_fp: row.r_fp,
        };
        match records.last_mut() {
            Some(r) if r.trial == row.trial => r.checkpoints.push(cp),
            _ => records.push(TrialRecord { trial: row.trial, seed: 0, checkpoints: vec![cp] }),
        }
    }
    Ok(records)
}

/// Everything needed to reproduce and plot a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub panels: Vec<PanelResult>,
}

impl Summary {
    pub fn new(command: &str, config: RunConfig, panels: Vec<PanelResult>) -> Self {
        Summary {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            config,
            panels,
        }
    }
}
