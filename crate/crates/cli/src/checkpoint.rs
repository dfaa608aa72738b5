//! Append-only checkpoint log.
//!
//! Layout, one item per line:
//!
//! ```text
//! rabidimer-checkpoint v1 <config hash>
//! <resolved config as JSON>
//! <record as JSON>
//! ...
//! ```
//!
//! Each record is written with a single `write` of the full line followed by a
//! data sync. A trailing line without its newline is the remains of an
//! interrupted append and is cut off when the log is reopened.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rabidimer_core::FsCurve;
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::output::ResultRow;

const MAGIC: &str = "rabidimer-checkpoint v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Record {
    Row(ResultRow),
    Curve(FsCurve),
}

impl Record {
    pub fn key(&self) -> String {
        match self {
            Record::Row(r) => point_key(r.g, r.eta, Some(r.j)),
            Record::Curve(c) => point_key(c.g, c.eta, None),
        }
    }
}

/// Exact identity of a unit of work; bit patterns avoid any float formatting ambiguity.
pub fn point_key(g: f64, eta: f64, j: Option<f64>) -> String {
    match j {
        Some(j) => format!("{:016x}-{:016x}-{:016x}", g.to_bits(), eta.to_bits(), j.to_bits()),
        None => format!("{:016x}-{:016x}", g.to_bits(), eta.to_bits()),
    }
}

pub struct Checkpoint {
    path: PathBuf,
    file: File,
    records: Vec<Record>,
    keys: HashSet<String>,
}

struct Parsed {
    hash: String,
    config: SweepConfig,
    records: Vec<Record>,
    /// Byte length of the intact prefix.
    intact: usize,
}

fn parse(path: &Path, text: &str) -> Result<Option<Parsed>> {
    let intact = text.rfind('\n').map_or(0, |i| i + 1);
    let mut lines = text[..intact].lines().enumerate();
    let malformed = |line: usize, message: String| CliError::Checkpoint {
        path: path.to_path_buf(),
        line: line + 1,
        message,
    };
    let Some((_, first)) = lines.next() else {
        return Ok(None);
    };
    let hash = first
        .strip_prefix(MAGIC)
        .map(str::trim)
        .filter(|h| !h.is_empty())
        .ok_or_else(|| malformed(0, "not a rabidimer checkpoint".into()))?
        .to_string();
    let Some((_, second)) = lines.next() else {
        return Ok(None);
    };
    let config: SweepConfig =
        serde_json::from_str(second).map_err(|e| malformed(1, e.to_string()))?;
    let records = lines
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| malformed(i, e.to_string())))
        .collect::<Result<Vec<Record>>>()?;
    Ok(Some(Parsed {
        hash,
        config,
        records,
        intact,
    }))
}

impl Checkpoint {
    /// Stored configuration of an existing checkpoint.
    pub fn read_config(path: &Path) -> Result<SweepConfig> {
        let text = fs::read_to_string(path)?;
        parse(path, &text)?.map(|p| p.config).ok_or_else(|| CliError::Checkpoint {
            path: path.to_path_buf(),
            line: 1,
            message: "header is incomplete".into(),
        })
    }

    /// Opens the log for `cfg`, creating it if needed.
    ///
    /// An existing log must carry the same configuration hash.
    pub fn open(path: &Path, cfg: &SweepConfig) -> Result<Self> {
        let current = cfg.hash();
        let existing = match fs::read_to_string(path) {
            Ok(text) => parse(path, &text)?.map(|p| (p, text.len())),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e.into()),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let (file, records) = match existing {
            Some((parsed, len)) => {
                if parsed.hash != current {
                    return Err(CliError::HashMismatch {
                        path: path.to_path_buf(),
                        stored: parsed.hash,
                        current,
                    });
                }
                let file = OpenOptions::new().append(true).open(path)?;
                if parsed.intact < len {
                    log::warn!(
                        "dropping {} bytes of an interrupted record in {}",
                        len - parsed.intact,
                        path.display()
                    );
                    file.set_len(parsed.intact as u64)?;
                }
                (file, parsed.records)
            }
            None => {
                let mut file = File::create(path)?;
                let header = format!("{MAGIC} {current}\n{}\n", serde_json::to_string(cfg)?);
                file.write_all(header.as_bytes())?;
                file.sync_data()?;
                (file, Vec::new())
            }
        };
        let keys = records.iter().map(Record::key).collect();
        Ok(Checkpoint {
            path: path.to_path_buf(),
            file,
            records,
            keys,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn contains(&self, key: &str) -> bool {
        self.keys.contains(key)
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Appends one record; a key that is already present is ignored.
    pub fn append(&mut self, record: Record) -> Result<()> {
        let key = record.key();
        if self.keys.contains(&key) {
            return Ok(());
        }
        let mut line = serde_json::to_string(&record)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        self.keys.insert(key);
        self.records.push(record);
        Ok(())
    }
}
