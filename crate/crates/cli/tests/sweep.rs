use std::fs;
use std::path::Path;
use std::process::Command;

use rabidimer_cli::output::read_rows;
use rabidimer_cli::{run, CliError, Mode, Settings, SweepConfig};

fn small_scan(out: &Path, workers: usize) -> SweepConfig {
    SweepConfig::resolve(
        Mode::FsScan,
        Settings {
            g: Some("0.5,0.9".into()),
            eta: Some("20,50".into()),
            j_min: Some(0.05),
            j_max: Some(0.45),
            j_count: Some(5),
            ncut: Some(5),
            workers: Some(workers),
            out: Some(out.to_path_buf()),
            ..Settings::default()
        },
    )
    .unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rabidimer"))
}

#[test]
fn interrupted_run_resumes_to_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let straight = small_scan(&dir.path().join("straight"), 2);
    let summary = run(&straight).unwrap();
    assert_eq!((summary.computed, summary.reused), (20, 0));
    let reference = fs::read(dir.path().join("straight/fs_scan.csv")).unwrap();

    let broken = small_scan(&dir.path().join("broken"), 2);
    run(&broken).unwrap();
    let ck = broken.checkpoint_path();
    let text = fs::read_to_string(&ck).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // header (2 lines) + half of the 20 records, then a torn partial record
    let mut cut = lines[..12].join("\n");
    cut.push_str("\n{\"row\":{\"g\":0.5");
    fs::write(&ck, cut).unwrap();
    fs::remove_file(dir.path().join("broken/fs_scan.csv")).unwrap();

    let status = bin().arg("resume").arg(&ck).status().unwrap();
    assert!(status.success());
    assert_eq!(fs::read(dir.path().join("broken/fs_scan.csv")).unwrap(), reference);
    let resumed = fs::read_to_string(&ck).unwrap();
    assert_eq!(resumed.lines().count(), 22);

    // resuming a finished run recomputes nothing
    let again = run(&broken).unwrap();
    assert_eq!((again.computed, again.reused), (0, 20));
    assert_eq!(fs::read(dir.path().join("broken/fs_scan.csv")).unwrap(), reference);
    assert_eq!(fs::read_to_string(&ck).unwrap(), resumed);
}

#[test]
fn resume_with_changed_ncut_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_scan(dir.path(), 1);
    run(&cfg).unwrap();
    let ck = cfg.checkpoint_path();
    let out = bin().args(["resume", "--ncut", "6"]).arg(&ck).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different run"));

    let mut changed = cfg.clone();
    changed.n_cut = 6;
    assert!(matches!(run(&changed), Err(CliError::HashMismatch { .. })));
}

#[test]
fn worker_count_does_not_change_values() {
    let dir = tempfile::tempdir().unwrap();
    run(&small_scan(&dir.path().join("one"), 1)).unwrap();
    run(&small_scan(&dir.path().join("four"), 4)).unwrap();
    let one = read_rows(&dir.path().join("one/fs_scan.csv")).unwrap();
    let four = read_rows(&dir.path().join("four/fs_scan.csv")).unwrap();
    assert_eq!(one.len(), 20);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!((a.g, a.eta, a.j), (b.g, b.eta, b.j));
        for (x, y) in [(a.e0, b.e0), (a.chi_f, b.chi_f), (a.x2_minus, b.x2_minus)] {
            let (x, y) = (x.unwrap(), y.unwrap());
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} vs {y}");
        }
    }
}

#[test]
fn schema_is_stable_and_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_scan(dir.path(), 2);
    run(&cfg).unwrap();
    let path = dir.path().join("fs_scan.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "g,eta,ncut,j,e0,n_l,n_r,x2_minus,fidelity,chi_f,flags"
    );
    let rows = read_rows(&path).unwrap();
    assert!(rows.windows(2).all(|w| w[0].canonical_cmp(&w[1]).is_lt()));
    let copy = dir.path().join("copy.csv");
    rabidimer_cli::output::write_rows(&copy, &rows).unwrap();
    assert_eq!(fs::read_to_string(&copy).unwrap(), text);
    for row in &rows {
        let (nl, nr) = (row.n_l.unwrap(), row.n_r.unwrap());
        assert!((nl - nr).abs() <= 1e-8 * (1.0 + nl));
        assert!(row.chi_f.unwrap() >= 0.0 && row.fidelity.unwrap() <= 1.0);
    }
}

#[test]
fn observables_mode_leaves_fs_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_scan(dir.path(), 1);
    cfg.mode = Mode::Observables;
    run(&cfg).unwrap();
    let rows = read_rows(&dir.path().join("observables.csv")).unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.chi_f.is_none() && r.fidelity.is_none() && r.e0.is_some()));
}

#[test]
fn empty_j_grid_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let result = bin()
        .args(["fs-scan", "--g", "0.7", "--j-count", "0", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn phase_diagram_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["phase-diagram", "--g", "0:1:0.01", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut r = csv::Reader::from_path(dir.path().join("phase_diagram.csv")).unwrap();
    let rows: Vec<(f64, f64)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    assert!(rows.contains(&(0.5, 0.375)));
    assert!(rows.iter().all(|&(g, jc)| jc == (1.0 - g * g) / 2.0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    fs::write(
        &file,
        "g = 0.6\neta = \"30,60\"\nj-min = 0.1\nj-max = 0.2\nj-count = 3\nncut = 9\nworkers = 1\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = bin()
        .args(["observables", "--ncut", "4", "--config"])
        .arg(&file)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_rows(&out.join("observables.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.n_cut == 4 && r.g == 0.6));
    let info: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(info["n_cut"], 4);
}

#[test]
fn scaling_and_collapse_reports() {
    let dir = tempfile::tempdir().unwrap();
    let settings = Settings {
        g: Some("0.7".into()),
        eta: Some("100,150,200".into()),
        ncut: Some(16),
        j_count: Some(17),
        workers: Some(2),
        out: Some(dir.path().join("scaling")),
        ..Settings::default()
    };
    let cfg = SweepConfig::resolve(Mode::Scaling, settings.clone()).unwrap();
    run(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("scaling/scaling.txt")).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    assert!(head.starts_with("g=0.7 mu="), "{head}");
    for key in ["mu_stderr=", "nu=", "nu_stderr="] {
        assert!(head.contains(key));
    }
    assert_eq!(lines.filter(|l| l.starts_with("eta=")).count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("scaling/scaling.json")).unwrap()).unwrap();
    let mu = json[0]["mu"].as_f64().unwrap();
    assert!(mu > 0.0 && mu.is_finite());

    let collapse = SweepConfig::resolve(
        Mode::Collapse,
        Settings {
            out: Some(dir.path().join("collapse")),
            ..settings
        },
    )
    .unwrap();
    run(&collapse).unwrap();
    let summary = fs::read_to_string(dir.path().join("collapse/collapse.txt")).unwrap();
    assert!(summary.starts_with("g=0.7 nu=1.5 collapse_score="), "{summary}");
    let mut r = csv::Reader::from_path(dir.path().join("collapse/collapse.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["g", "eta", "nu", "u", "y"]);
    assert!(r.records().count() > 3 * 17);
}
