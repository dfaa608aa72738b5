//! Result rows and the files a run leaves on disk.
//!
//! Every file is written to a temporary sibling first and renamed into place,
//! so an interrupted run never leaves a half-written artifact behind.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use rabidimer_core::criticality::rescale;
use rabidimer_core::{FsCurve, ScalingReport};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const ROW_HEADER: [&str; 11] = [
    "g", "eta", "ncut", "j", "e0", "n_l", "n_r", "x2_minus", "fidelity", "chi_f", "flags",
];

/// Per-point condition recorded in the `flags` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// A cavity population exceeds half the Fock cutoff.
    Truncation,
    /// The eigensolver stopped at its iteration cap; values come from the best iterate.
    Nonconverged,
    /// The point could not be computed at all.
    Failed,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Truncation => "truncation",
            Flag::Nonconverged => "nonconverged",
            Flag::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Flag> {
        match s {
            "truncation" => Some(Flag::Truncation),
            "nonconverged" => Some(Flag::Nonconverged),
            "failed" => Some(Flag::Failed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub g: f64,
    pub eta: f64,
    pub n_cut: usize,
    pub j: f64,
    pub e0: Option<f64>,
    pub n_l: Option<f64>,
    pub n_r: Option<f64>,
    pub x2_minus: Option<f64>,
    pub fidelity: Option<f64>,
    pub chi_f: Option<f64>,
    pub flags: Vec<Flag>,
}

impl ResultRow {
    pub fn failed(g: f64, eta: f64, n_cut: usize, j: f64) -> Self {
        ResultRow {
            g,
            eta,
            n_cut,
            j,
            e0: None,
            n_l: None,
            n_r: None,
            x2_minus: None,
            fidelity: None,
            chi_f: None,
            flags: vec![Flag::Failed],
        }
    }

    /// Canonical row order: by `g`, then `η`, then `J`.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.g
            .total_cmp(&other.g)
            .then(self.eta.total_cmp(&other.eta))
            .then(self.j.total_cmp(&other.j))
    }

    fn fields(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        vec![
            fmt_float(self.g),
            fmt_float(self.eta),
            self.n_cut.to_string(),
            fmt_float(self.j),
            opt(self.e0),
            opt(self.n_l),
            opt(self.n_r),
            opt(self.x2_minus),
            opt(self.fidelity),
            opt(self.chi_f),
            self.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join("|"),
        ]
    }

    fn from_fields(rec: &csv::StringRecord) -> Result<Self> {
        let bad = |what: &str| CliError::Config(format!("unparsable CSV field `{what}` in {rec:?}"));
        let field = |i: usize| rec.get(i).ok_or_else(|| bad(ROW_HEADER[i]));
        let num = |i: usize| -> Result<f64> { field(i)?.parse().map_err(|_| bad(ROW_HEADER[i])) };
        let opt = |i: usize| -> Result<Option<f64>> {
            let s = field(i)?;
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(ROW_HEADER[i]))
            }
        };
        let flags = field(10)?;
        let flags = if flags.is_empty() {
            Vec::new()
        } else {
            flags
                .split('|')
                .map(|f| Flag::parse(f).ok_or_else(|| bad("flags")))
                .collect::<Result<_>>()?
        };
        Ok(ResultRow {
            g: num(0)?,
            eta: num(1)?,
            n_cut: field(2)?.parse().map_err(|_| bad("ncut"))?,
            j: num(3)?,
            e0: opt(4)?,
            n_l: opt(5)?,
            n_r: opt(6)?,
            x2_minus: opt(7)?,
            fidelity: opt(8)?,
            chi_f: opt(9)?,
            flags,
        })
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], records: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Writes `rows` in canonical order.
pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    write_atomic(path, &csv_bytes(&ROW_HEADER, sorted.iter().map(|r| r.fields()))?)
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().ne(ROW_HEADER) {
        return Err(CliError::Config(format!(
            "{} has header {header:?}, expected {ROW_HEADER:?}",
            path.display()
        )));
    }
    r.records()
        .map(|rec| ResultRow::from_fields(&rec?))
        .collect()
}

/// All susceptibility points visited by the peak searches.
pub fn write_curves(path: &Path, curves: &[FsCurve]) -> Result<()> {
    let header = ["g", "eta", "ncut", "delta_j", "j", "chi_f", "fidelity"];
    let records = curves.iter().flat_map(|c| {
        c.points.iter().map(move |p| {
            vec![
                fmt_float(c.g),
                fmt_float(c.eta),
                c.n_cut.to_string(),
                fmt_float(c.delta_j),
                fmt_float(p.j),
                fmt_float(p.chi_f),
                fmt_float(p.fidelity),
            ]
        })
    });
    write_atomic(path, &csv_bytes(&header, records)?)
}

pub fn write_reports(dir: &Path, reports: &[ScalingReport]) -> Result<()> {
    let text: Vec<String> = reports.iter().map(ScalingReport::to_text).collect();
    write_atomic(&dir.join("scaling.txt"), text.join("\n").as_bytes())?;
    let mut json = serde_json::to_string_pretty(reports)?;
    json.push('\n');
    write_atomic(&dir.join("scaling.json"), json.as_bytes())
}

/// Rescaled `(u, y)` pairs of every curve, plus the per-`g` score summary.
pub fn write_collapse(dir: &Path, families: &[(f64, Vec<FsCurve>, f64)], nu: f64) -> Result<()> {
    let header = ["g", "eta", "nu", "u", "y"];
    let mut records = Vec::new();
    let mut summary = String::new();
    for (g, curves, score) in families {
        for c in curves {
            for (u, y) in rescale(c, nu) {
                records.push(vec![fmt_float(*g), fmt_float(c.eta), fmt_float(nu), fmt_float(u), fmt_float(y)]);
            }
        }
        let _ = writeln!(summary, "g={g} nu={nu} collapse_score={score:.6e}");
    }
    write_atomic(&dir.join("collapse.csv"), &csv_bytes(&header, records)?)?;
    write_atomic(&dir.join("collapse.txt"), summary.as_bytes())
}

pub fn write_phase_diagram(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let records = points.iter().map(|&(g, jc)| vec![fmt_float(g), fmt_float(jc)]);
    write_atomic(path, &csv_bytes(&["g", "j_c"], records)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    write_atomic(path, json.as_bytes())
}
