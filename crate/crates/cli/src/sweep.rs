//! Scheduling of grid points, checkpointing and artifact assembly for each mode.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;

use rabidimer_core::fidelity::chi_from_states;
use rabidimer_core::observables::observables_of;
use rabidimer_core::{
    build_hamiltonian, collapse_score, critical_hopping, ground_state, locate_peak,
    scaling_report, EigenResult, Error as CoreError, FsCurve, LanczosConfig, ModelParams,
    PeakSearch,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::checkpoint::{point_key, Checkpoint, Record};
use crate::config::{JGrid, Mode, SweepConfig};
use crate::error::{CliError, Result};
use crate::output::{self, Flag, ResultRow};

/// What a finished run did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub computed: usize,
    pub reused: usize,
    pub failed: usize,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    Point { g: f64, eta: f64, j: f64 },
    Curve { g: f64, eta: f64 },
}

impl Unit {
    fn key(&self) -> String {
        match *self {
            Unit::Point { g, eta, j } => point_key(g, eta, Some(j)),
            Unit::Curve { g, eta } => point_key(g, eta, None),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Point { g, eta, j } => write!(f, "(g={g}, eta={eta}, J={j})"),
            Unit::Curve { g, eta } => write!(f, "peak search (g={g}, eta={eta})"),
        }
    }
}

/// Ground state, falling back to the best iterate when the solver hits its cap.
fn solve(params: &ModelParams, cfg: &LanczosConfig) -> Result<(EigenResult, bool)> {
    let h = build_hamiltonian(params)?;
    match ground_state(&h, cfg) {
        Ok(r) => Ok((r, true)),
        Err(CoreError::NotConverged { best, iterations }) => {
            log::warn!(
                "no convergence after {iterations} steps at J={} (residual {:.2e})",
                params.j,
                best.residual
            );
            Ok((*best, false))
        }
        Err(e) => Err(e.into()),
    }
}

fn compute_point(cfg: &SweepConfig, g: f64, eta: f64, j: f64) -> Result<ResultRow> {
    let params = ModelParams::new(g, eta, j, cfg.n_cut)?;
    let lanczos = cfg.lanczos();
    let (gs, mut converged) = solve(&params, &lanczos)?;
    let obs = observables_of(gs.value, &gs.vector, gs.residual, &params)?;
    let (fidelity, chi_f) = if cfg.mode == Mode::FsScan {
        let (next, ok) = solve(&params.with_j(j + cfg.delta_j), &lanczos)?;
        converged &= ok;
        let p = chi_from_states(&gs.vector, &next.vector, j, cfg.delta_j)?;
        (Some(p.fidelity), Some(p.chi_f))
    } else {
        (None, None)
    };
    let mut flags = Vec::new();
    if obs.truncation_pressure {
        flags.push(Flag::Truncation);
    }
    if !converged {
        flags.push(Flag::Nonconverged);
    }
    Ok(ResultRow {
        g,
        eta,
        n_cut: cfg.n_cut,
        j,
        e0: Some(obs.e0),
        n_l: Some(obs.n_photon_l),
        n_r: Some(obs.n_photon_r),
        x2_minus: Some(obs.x2_minus),
        fidelity,
        chi_f,
        flags,
    })
}

fn compute_curve(cfg: &SweepConfig, g: f64, eta: f64) -> Result<FsCurve> {
    let search = PeakSearch {
        grid_points: cfg.j_grid.count(),
        ..PeakSearch::default()
    };
    let window = Some(cfg.j_grid.window(g));
    Ok(locate_peak(g, eta, cfg.n_cut, cfg.delta_j, window, &search, &cfg.lanczos())?)
}

fn compute(cfg: &SweepConfig, unit: Unit) -> Result<Record> {
    match unit {
        Unit::Point { g, eta, j } => compute_point(cfg, g, eta, j).map(Record::Row),
        Unit::Curve { g, eta } => compute_curve(cfg, g, eta).map(Record::Curve),
    }
}

fn units(cfg: &SweepConfig) -> Vec<Unit> {
    let mut out = Vec::new();
    for &g in &cfg.g {
        for &eta in &cfg.eta {
            if cfg.mode.is_pointwise() {
                out.extend(cfg.j_grid.values(g).into_iter().map(|j| Unit::Point { g, eta, j }));
            } else {
                out.push(Unit::Curve { g, eta });
            }
        }
    }
    out
}

struct Sink<'a> {
    checkpoint: &'a mut Checkpoint,
    failures: Vec<(Unit, String)>,
    computed: usize,
}

/// Runs every unit missing from the checkpoint on a pool of `cfg.workers` threads.
fn execute(cfg: &SweepConfig, all: &[Unit], checkpoint: &mut Checkpoint) -> Result<(usize, Vec<(Unit, String)>)> {
    let pending: Vec<Unit> = all
        .iter()
        .copied()
        .filter(|u| !checkpoint.contains(&u.key()))
        .collect();
    log::info!(
        "{} of {} units to compute ({} {})",
        pending.len(),
        all.len(),
        cfg.mode,
        checkpoint.path().display()
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let sink = Mutex::new(Sink {
        checkpoint,
        failures: Vec::new(),
        computed: 0,
    });
    let outcome = pool.install(|| {
        pending.par_iter().try_for_each(|&unit| {
            let result = compute(cfg, unit);
            let mut sink = sink.lock().unwrap_or_else(|e| e.into_inner());
            match result {
                Ok(record) => {
                    log::info!("done {unit}");
                    sink.computed += 1;
                    sink.checkpoint.append(record)
                }
                Err(e) if cfg.keep_going => {
                    log::warn!("skipping {unit}: {e}");
                    sink.failures.push((unit, e.to_string()));
                    Ok(())
                }
                Err(e) => Err(CliError::PointFailures {
                    failed: 1,
                    first: format!("{unit}: {e}"),
                }),
            }
        })
    });
    let sink = sink.into_inner().unwrap_or_else(|e| e.into_inner());
    outcome?;
    Ok((sink.computed, sink.failures))
}

#[derive(Serialize)]
struct JWindow {
    g: f64,
    j_min: f64,
    j_max: f64,
    count: usize,
}

/// Run description written next to the data; everything here affects the numbers.
#[derive(Serialize)]
struct RunInfo<'a> {
    version: &'static str,
    hash: String,
    mode: Mode,
    g: &'a [f64],
    eta: &'a [f64],
    j_grid: JGrid,
    j_windows: Vec<JWindow>,
    n_cut: usize,
    delta_j: f64,
    seed: u64,
    tol: f64,
    max_iter: usize,
    nu: f64,
}

fn run_info(cfg: &SweepConfig) -> RunInfo<'_> {
    RunInfo {
        version: env!("CARGO_PKG_VERSION"),
        hash: cfg.hash(),
        mode: cfg.mode,
        g: &cfg.g,
        eta: &cfg.eta,
        j_grid: cfg.j_grid,
        j_windows: cfg
            .g
            .iter()
            .map(|&g| {
                let (j_min, j_max) = cfg.j_grid.window(g);
                JWindow {
                    g,
                    j_min,
                    j_max,
                    count: cfg.j_grid.count(),
                }
            })
            .collect(),
        n_cut: cfg.n_cut,
        delta_j: cfg.delta_j,
        seed: cfg.seed,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        nu: cfg.nu,
    }
}

/// Executes a validated configuration and writes its artifacts under `cfg.out`.
pub fn run(cfg: &SweepConfig) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    if cfg.mode == Mode::PhaseDiagram {
        let path = cfg.out.join("phase_diagram.csv");
        let points: Vec<(f64, f64)> = cfg.g.iter().map(|&g| (g, critical_hopping(g))).collect();
        output::write_phase_diagram(&path, &points)?;
        return Ok(RunSummary {
            computed: points.len(),
            artifacts: vec![path],
            ..RunSummary::default()
        });
    }

    let info_path = cfg.out.join("run.json");
    output::write_json(&info_path, &run_info(cfg))?;
    let mut checkpoint = Checkpoint::open(&cfg.checkpoint_path(), cfg)?;
    let all = units(cfg);
    let (computed, failures) = execute(cfg, &all, &mut checkpoint)?;
    let mut summary = RunSummary {
        computed,
        reused: all.len() - computed - failures.len(),
        failed: failures.len(),
        artifacts: vec![info_path],
    };

    if cfg.mode.is_pointwise() {
        let mut rows: Vec<ResultRow> = checkpoint
            .records()
            .iter()
            .filter_map(|r| match r {
                Record::Row(row) => Some(row.clone()),
                Record::Curve(_) => None,
            })
            .collect();
        rows.extend(failures.iter().filter_map(|(u, _)| match *u {
            Unit::Point { g, eta, j } => Some(ResultRow::failed(g, eta, cfg.n_cut, j)),
            Unit::Curve { .. } => None,
        }));
        let name = if cfg.mode == Mode::FsScan { "fs_scan.csv" } else { "observables.csv" };
        let path = cfg.out.join(name);
        output::write_rows(&path, &rows)?;
        summary.artifacts.push(path);
        return Ok(summary);
    }

    let mut curves: Vec<FsCurve> = checkpoint
        .records()
        .iter()
        .filter_map(|r| match r {
            Record::Curve(c) => Some(c.clone()),
            Record::Row(_) => None,
        })
        .collect();
    curves.sort_by(|a, b| a.g.total_cmp(&b.g).then(a.eta.total_cmp(&b.eta)));
    let curves_path = cfg.out.join("curves.csv");
    output::write_curves(&curves_path, &curves)?;
    summary.artifacts.push(curves_path);

    let mut reports = Vec::new();
    let mut families = Vec::new();
    for &g in &cfg.g {
        let family: Vec<FsCurve> = curves.iter().filter(|c| c.g == g).cloned().collect();
        match cfg.mode {
            Mode::Scaling => match scaling_report(&family) {
                Ok(mut report) => {
                    report.collapse_score = collapse_score(&family, report.nu).ok();
                    reports.push(report);
                }
                Err(e) => log::warn!("no scaling report for g={g}: {e}"),
            },
            _ => match collapse_score(&family, cfg.nu) {
                Ok(score) => families.push((g, family, score)),
                Err(e) => log::warn!("no collapse for g={g}: {e}"),
            },
        }
    }
    if cfg.mode == Mode::Scaling {
        if reports.is_empty() {
            return Err(CliError::PointFailures {
                failed: summary.failed,
                first: "no g value has enough curves for a fit".into(),
            });
        }
        output::write_reports(&cfg.out, &reports)?;
        summary.artifacts.push(cfg.out.join("scaling.txt"));
        summary.artifacts.push(cfg.out.join("scaling.json"));
    } else {
        if families.is_empty() {
            return Err(CliError::PointFailures {
                failed: summary.failed,
                first: "no g value has enough curves for a collapse".into(),
            });
        }
        output::write_collapse(&cfg.out, &families, cfg.nu)?;
        summary.artifacts.push(cfg.out.join("collapse.csv"));
        summary.artifacts.push(cfg.out.join("collapse.txt"));
    }
    Ok(summary)
}
