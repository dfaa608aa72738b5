//! Sweep configuration: flag and file settings, grid syntax, validation and the run hash.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rabidimer_core::critical_hopping;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_N_CUT: usize = 80;
/// Finite-difference step for susceptibility curve scans.
pub const DEFAULT_DELTA_J_SCAN: f64 = 5e-5;
/// Smaller step for peak heights entering the exponent fit.
pub const DEFAULT_DELTA_J_FIT: f64 = 1e-5;
pub const DEFAULT_J_COUNT: usize = 41;
pub const DEFAULT_NU: f64 = 1.5;
pub const DEFAULT_ETAS: &str = "1100:1500:100";
/// Auto window around the mean-field boundary, in units of `J_c`.
pub const AUTO_WINDOW: (f64, f64) = (0.6, 1.4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Observables,
    FsScan,
    Scaling,
    Collapse,
    PhaseDiagram,
}

impl Mode {
    /// Modes whose unit of work is a single `(g, η, J)` point.
    pub fn is_pointwise(self) -> bool {
        matches!(self, Mode::Observables | Mode::FsScan)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Observables => "observables",
            Mode::FsScan => "fs-scan",
            Mode::Scaling => "scaling",
            Mode::Collapse => "collapse",
            Mode::PhaseDiagram => "phase-diagram",
        };
        f.write_str(name)
    }
}

/// Partially specified settings, as read from flags or a config file.
///
/// Every field is optional so that two layers can be merged; [`Settings::over`]
/// lets the receiver win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    #[serde(default, deserialize_with = "grid_text")]
    pub g: Option<String>,
    #[serde(default, deserialize_with = "grid_text")]
    pub eta: Option<String>,
    pub j_min: Option<f64>,
    pub j_max: Option<f64>,
    pub j_count: Option<usize>,
    pub ncut: Option<usize>,
    pub delta_j: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub nu: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub keep_going: Option<bool>,
}

/// Grids may be written as numbers or as grid strings in the file.
fn grid_text<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Num(f64),
        Text(String),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|raw| match raw {
        Raw::Int(i) => i.to_string(),
        Raw::Num(x) => x.to_string(),
        Raw::Text(s) => s,
    }))
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Fields set in `self` take precedence over `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            g: self.g.or(base.g),
            eta: self.eta.or(base.eta),
            j_min: self.j_min.or(base.j_min),
            j_max: self.j_max.or(base.j_max),
            j_count: self.j_count.or(base.j_count),
            ncut: self.ncut.or(base.ncut),
            delta_j: self.delta_j.or(base.delta_j),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            max_iter: self.max_iter.or(base.max_iter),
            nu: self.nu.or(base.nu),
            workers: self.workers.or(base.workers),
            out: self.out.or(base.out),
            checkpoint: self.checkpoint.or(base.checkpoint),
            keep_going: self.keep_going.or(base.keep_going),
        }
    }
}

/// Parses `a:b:step` (inclusive of `b`) or a comma-separated list.
///
/// The result is sorted and free of duplicates. Range values are rounded to
/// twelve decimals so that `0:1:0.1` yields `0.3` rather than `0.30000000000000004`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| CliError::Config(format!("grid `{text}`: {msg}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(format!("`{}` is not a finite number", s.trim())))
    };
    let mut values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step".into()));
        }
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || b < a {
            return Err(bad("needs step > 0 and stop >= start".into()));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
            .collect::<Vec<_>>()
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?
    };
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.is_empty() {
        return Err(bad("grid is empty".into()));
    }
    Ok(values)
}

/// Hopping grid: explicit `[min, max]` with `count` points, or the auto window per `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JGrid {
    Auto { count: usize },
    Explicit { min: f64, max: f64, count: usize },
}

impl JGrid {
    pub fn count(&self) -> usize {
        match *self {
            JGrid::Auto { count } | JGrid::Explicit { count, .. } => count,
        }
    }

    pub fn window(&self, g: f64) -> (f64, f64) {
        match *self {
            JGrid::Auto { .. } => {
                let jc = critical_hopping(g);
                (AUTO_WINDOW.0 * jc, AUTO_WINDOW.1 * jc)
            }
            JGrid::Explicit { min, max, .. } => (min, max),
        }
    }

    pub fn values(&self, g: f64) -> Vec<f64> {
        let (lo, hi) = self.window(g);
        let n = self.count();
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Fully resolved and validated sweep description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mode: Mode,
    pub g: Vec<f64>,
    pub eta: Vec<f64>,
    pub j_grid: JGrid,
    pub n_cut: usize,
    pub delta_j: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub nu: f64,
    pub out: PathBuf,
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub keep_going: bool,
}

/// The part of the configuration that determines the numbers a run produces.
#[derive(Serialize)]
struct Fingerprint<'a> {
    mode: Mode,
    g: &'a [f64],
    eta: &'a [f64],
    j_grid: JGrid,
    n_cut: usize,
    delta_j: f64,
    seed: u64,
    tol: f64,
    max_iter: usize,
}

impl SweepConfig {
    pub fn resolve(mode: Mode, s: Settings) -> Result<Self> {
        let lanczos = rabidimer_core::LanczosConfig::default();
        let g = parse_grid(
            s.g.as_deref()
                .ok_or_else(|| CliError::Config("no g values given (--g)".into()))?,
        )?;
        let eta = parse_grid(s.eta.as_deref().unwrap_or(DEFAULT_ETAS))?;
        let count = s.j_count.unwrap_or(DEFAULT_J_COUNT);
        let j_grid = match (s.j_min, s.j_max) {
            (None, None) => JGrid::Auto { count },
            (Some(min), Some(max)) => JGrid::Explicit { min, max, count },
            _ => {
                return Err(CliError::Config(
                    "--j-min and --j-max must be given together".into(),
                ))
            }
        };
        let workers = match s.workers {
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let cfg = SweepConfig {
            mode,
            g,
            eta,
            j_grid,
            n_cut: s.ncut.unwrap_or(DEFAULT_N_CUT),
            delta_j: s.delta_j.unwrap_or(match mode {
                Mode::FsScan | Mode::Observables => DEFAULT_DELTA_J_SCAN,
                _ => DEFAULT_DELTA_J_FIT,
            }),
            seed: s.seed.unwrap_or(lanczos.seed),
            tol: s.tol.unwrap_or(lanczos.tol),
            max_iter: s.max_iter.unwrap_or(lanczos.max_iter),
            nu: s.nu.unwrap_or(DEFAULT_NU),
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
            workers,
            checkpoint: s.checkpoint,
            keep_going: s.keep_going.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.workers == 0 {
            return fail("worker count must be >= 1".into());
        }
        if self.g.iter().any(|&g| !(g >= 0.0)) {
            return fail("g values must be >= 0".into());
        }
        if self.mode == Mode::PhaseDiagram {
            return Ok(());
        }
        if self.eta.iter().any(|&e| !(e > 0.0)) {
            return fail("eta values must be > 0".into());
        }
        if self.n_cut == 0 {
            return fail("ncut must be >= 1".into());
        }
        if !(self.delta_j > 0.0) {
            return fail(format!("delta-j must be > 0, got {}", self.delta_j));
        }
        if !(self.tol > 0.0) || self.max_iter < 2 {
            return fail("solver needs tol > 0 and max-iter >= 2".into());
        }
        if !(self.nu > 0.0) {
            return fail(format!("nu must be > 0, got {}", self.nu));
        }
        let count = self.j_grid.count();
        if count == 0 {
            return fail("J grid is empty (j-count = 0)".into());
        }
        match self.j_grid {
            JGrid::Explicit { min, max, count } => {
                if !(min >= 0.0) || !max.is_finite() {
                    return fail(format!("J grid [{min}, {max}] must be finite and >= 0"));
                }
                if count == 1 && min != max {
                    return fail("a single-point J grid needs j-min = j-max".into());
                }
                if count > 1 && !(min < max) {
                    return fail(format!("J grid must be increasing, got [{min}, {max}]"));
                }
            }
            JGrid::Auto { .. } => {
                if let Some(g) = self.g.iter().find(|&&g| critical_hopping(g) <= 0.0) {
                    return fail(format!(
                        "no auto J window for g={g} (J_c <= 0); give --j-min/--j-max"
                    ));
                }
            }
        }
        match self.mode {
            Mode::Scaling | Mode::Collapse if count < 3 => {
                fail("peak search needs j-count >= 3".into())
            }
            Mode::Scaling if self.eta.len() < 3 => fail("scaling needs at least 3 eta values".into()),
            Mode::Collapse if self.eta.len() < 2 => fail("collapse needs at least 2 eta values".into()),
            _ => Ok(()),
        }
    }

    /// SHA-256 over the settings that affect computed values.
    ///
    /// Output location, worker count, checkpoint path, `keep_going` and `nu`
    /// (a pure post-processing choice) are left out, so changing them never
    /// invalidates a checkpoint.
    pub fn hash(&self) -> String {
        let fp = Fingerprint {
            mode: self.mode,
            g: &self.g,
            eta: &self.eta,
            j_grid: self.j_grid,
            n_cut: self.n_cut,
            delta_j: self.delta_j,
            seed: self.seed,
            tol: self.tol,
            max_iter: self.max_iter,
        };
        let bytes = serde_json::to_vec(&fp).expect("fingerprint serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint
            .clone()
            .unwrap_or_else(|| self.out.join("checkpoint.log"))
    }

    pub fn lanczos(&self) -> rabidimer_core::LanczosConfig {
        rabidimer_core::LanczosConfig {
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
            ..Default::default()
        }
    }

    /// Inverse of [`SweepConfig::resolve`], used to layer overrides on a stored run.
    pub fn to_settings(&self) -> Settings {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let (j_min, j_max) = match self.j_grid {
            JGrid::Auto { .. } => (None, None),
            JGrid::Explicit { min, max, .. } => (Some(min), Some(max)),
        };
        Settings {
            g: Some(list(&self.g)),
            eta: Some(list(&self.eta)),
            j_min,
            j_max,
            j_count: Some(self.j_grid.count()),
            ncut: Some(self.n_cut),
            delta_j: Some(self.delta_j),
            seed: Some(self.seed),
            tol: Some(self.tol),
            max_iter: Some(self.max_iter),
            nu: Some(self.nu),
            workers: Some(self.workers),
            out: Some(self.out.clone()),
            checkpoint: self.checkpoint.clone(),
            keep_going: Some(self.keep_going),
        }
    }
}
