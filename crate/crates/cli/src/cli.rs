//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::checkpoint::Checkpoint;
use crate::config::{Mode, Settings, SweepConfig};
use crate::error::{CliError, Result};
use crate::sweep::{self, RunSummary};

#[derive(Debug, Parser)]
#[command(name = "rabidimer", version, about = "Rabi-dimer ground-state, fidelity and scaling sweeps")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground-state energy, photon numbers and ⟨x₋²⟩ on a (g, η, J) grid.
    Observables,
    /// Observables plus the fidelity susceptibility on a (g, η, J) grid.
    FsScan,
    /// Susceptibility peak per η and the power-law fit of its height.
    Scaling,
    /// Peak curves rescaled with a trial ν, plus the collapse score.
    Collapse,
    /// Mean-field boundary J_c(g).
    PhaseDiagram,
    /// Continue the run recorded in a checkpoint.
    Resume {
        /// Checkpoint file (defaults to --checkpoint).
        path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Flat key = value file with defaults for any of these flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Coupling grid: `a:b:step` or a comma list.
    #[arg(long, global = true, value_name = "GRID", allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Frequency-ratio grid [default: 1100:1500:100].
    #[arg(long, global = true, value_name = "GRID")]
    pub eta: Option<String>,
    /// Lower end of the hopping grid (with --j-max; otherwise [0.6, 1.4]·J_c).
    #[arg(long, global = true)]
    pub j_min: Option<f64>,
    /// Upper end of the hopping grid.
    #[arg(long, global = true)]
    pub j_max: Option<f64>,
    /// Number of hopping values, or coarse peak-search points [default: 41].
    #[arg(long, global = true)]
    pub j_count: Option<usize>,
    /// Fock states per cavity [default: 80].
    #[arg(long, global = true)]
    pub ncut: Option<usize>,
    /// Finite-difference step in J [default: 5e-5 for fs-scan, 1e-5 for scaling and collapse].
    #[arg(long, global = true)]
    pub delta_j: Option<f64>,
    /// Seed of the Lanczos start vector.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative residual tolerance of the eigensolver [default: 1e-10].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Eigensolver step cap [default: 5000].
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Trial correlation exponent for `collapse` [default: 1.5].
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// Worker threads [default: available cores].
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Checkpoint log [default: <out>/checkpoint.log].
    #[arg(long, global = true, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Record failed points and carry on instead of stopping.
    #[arg(long, global = true)]
    pub keep_going: bool,
}

impl Opts {
    fn settings(&self) -> Settings {
        Settings {
            g: self.g.clone(),
            eta: self.eta.clone(),
            j_min: self.j_min,
            j_max: self.j_max,
            j_count: self.j_count,
            ncut: self.ncut,
            delta_j: self.delta_j,
            seed: self.seed,
            tol: self.tol,
            max_iter: self.max_iter,
            nu: self.nu,
            workers: self.workers,
            out: self.out.clone(),
            checkpoint: self.checkpoint.clone(),
            keep_going: self.keep_going.then_some(true),
        }
    }

    /// Flags layered over the config file, if any.
    fn layered(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Ok(self.settings().over(file))
    }
}

/// Resolves the invocation into a configuration without touching the file system
/// beyond reading the config file or checkpoint header.
pub fn resolve(cli: &Cli) -> Result<SweepConfig> {
    let mode = match &cli.command {
        Command::Observables => Mode::Observables,
        Command::FsScan => Mode::FsScan,
        Command::Scaling => Mode::Scaling,
        Command::Collapse => Mode::Collapse,
        Command::PhaseDiagram => Mode::PhaseDiagram,
        Command::Resume { path } => {
            let path = path
                .clone()
                .or_else(|| cli.opts.checkpoint.clone())
                .ok_or_else(|| CliError::Config("resume needs a checkpoint path".into()))?;
            let stored = Checkpoint::read_config(&path)?;
            let settings = cli.opts.layered()?.over(stored.to_settings());
            let mut cfg = SweepConfig::resolve(stored.mode, settings)?;
            cfg.checkpoint = Some(path);
            return Ok(cfg);
        }
    };
    SweepConfig::resolve(mode, cli.opts.layered()?)
}

pub fn run(cli: &Cli) -> Result<RunSummary> {
    sweep::run(&resolve(cli)?)
}
