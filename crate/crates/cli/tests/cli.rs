use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use evoc_core::store::{read_landscape, read_series_rows};
use evoc_core::LandscapePoint;

fn evoc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoc")).args(args).env("EVOC_WORKERS", "2").output().expect("spawn evoc")
}

fn ok(args: &[&str]) -> String {
    let out = evoc(args);
    assert!(out.status.success(), "evoc {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn landscape(dir: &Path) -> Vec<LandscapePoint> {
    read_landscape(fs::File::open(dir.join("landscape.csv")).unwrap()).unwrap()
}

fn small_sweep(dir: &Path, extra: &[&str]) {
    let mut args = vec!["sweep", "--seed", "11", "--c-values", "0.4,1", "--p-values", "0.5,1", "--runs", "4"];
    args.extend_from_slice(&["--out", path(dir)]);
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn zero_creators_keep_fitness_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s.csv");
    ok(&["run", "--seed", "5", "--c", "0", "--p", "1", "--out", path(&out)]);
    let rows = read_series_rows(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.mean_fitness == rows[0].mean_fitness));
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    let args = |o: &Path| ok(&["run", "--seed", "77", "--c", "0.6", "--p", "0.3", "--out", path(o)]);
    assert_eq!(args(&a), args(&b));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 77, "c": 0.6, "p": 0.9, "iterations": 30}"#).unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    ok(&["run", "--config", path(&cfg), "--p", "0.3", "--out", path(&a)]);
    ok(&["run", "--seed", "77", "--c", "0.6", "--p", "0.3", "--iterations", "30", "--out", path(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    fs::write(&cfg, r#"{"seed": 1, "colour": "red"}"#).unwrap();
    let out = evoc(&["run", "--config", path(&cfg), "--out", path(&a)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sparse_inventors_beat_all_inventors_on_matched_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["sweep", "--seed", "21", "--c-values", "0.4,1", "--p-values", "1", "--runs", "10", "--out", path(tmp.path())]);
    let land = landscape(tmp.path());
    let ttt = |c: f64| land.iter().find(|pt| pt.c == c).unwrap().mean_ttt;
    assert!(ttt(0.4) <= ttt(1.0), "{} > {}", ttt(0.4), ttt(1.0));
}

#[test]
fn small_grid_has_one_row_per_cell_and_zero_baseline_piv() {
    let tmp = tempfile::tempdir().unwrap();
    small_sweep(tmp.path(), &[]);
    let land = landscape(tmp.path());
    assert_eq!(land.len(), 4);
    let base = land.iter().find(|pt| pt.c == 1.0 && pt.p == 1.0).unwrap();
    assert_eq!(base.piv, 0.0);
    for file in ["series.csv", "provenance.json", "ridge_ttt.csv", "ridge_piv.csv"] {
        assert!(tmp.path().join(file).exists(), "{file} missing");
    }
}

#[test]
fn analysis_is_repeatable_and_monotone_in_tau() {
    let tmp = tempfile::tempdir().unwrap();
    let store = tmp.path().join("store");
    small_sweep(&store, &[]);
    let t9a = tmp.path().join("t9a");
    let t9b = tmp.path().join("t9b");
    let t10 = tmp.path().join("t10");
    ok(&["analyze", "--store", path(&store), "--tau", "9", "--out", path(&t9a)]);
    ok(&["analyze", "--store", path(&store), "--tau", "9", "--out", path(&t9b)]);
    ok(&["analyze", "--store", path(&store), "--tau", "10", "--out", path(&t10)]);
    for f in ["landscape.csv", "ridge_ttt.csv", "ridge_piv.csv"] {
        assert_eq!(fs::read(t9a.join(f)).unwrap(), fs::read(t9b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read(t9a.join("landscape.csv")).unwrap(), fs::read(store.join("landscape.csv")).unwrap());
    for (lo, hi) in landscape(&t9a).iter().zip(landscape(&t10).iter()) {
        assert!(hi.mean_ttt >= lo.mean_ttt);
    }
}

#[test]
fn unreachable_threshold_censors_every_run() {
    let tmp = tempfile::tempdir().unwrap();
    let store = tmp.path().join("store");
    small_sweep(&store, &["--tau", "10.5"]);
    for pt in landscape(&store) {
        assert_eq!(pt.censored_runs, pt.runs);
        assert_eq!(pt.mean_ttt, 100.0);
    }
}

#[test]
fn analyze_without_baseline_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let store = tmp.path().join("store");
    small_sweep(&store, &[]);
    let series = fs::read_to_string(store.join("series.csv")).unwrap();
    let kept: Vec<&str> =
        series.lines().filter(|l| !l.starts_with("1.0000000000000000e0,1.0000000000000000e0,")).collect();
    fs::write(store.join("series.csv"), kept.join("\n") + "\n").unwrap();
    let out = evoc(&["analyze", "--store", path(&store), "--out", path(&tmp.path().join("a"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("a/landscape.csv").exists());
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out_file = tmp.path().join("s.csv");
    let out = path(&out_file);
    let cases: [(&[&str], &str); 5] = [
        (&["run", "--c", "0.5", "--out", out], "--seed"),
        (&["run", "--seed", "1", "--c", "1.5", "--out", out], "--c"),
        (&["run", "--seed", "1", "--agents", "10", "--out", out], "--agents"),
        (&["run", "--seed", "1", "--rate", "0", "--out", out], "--rate"),
        (&["run", "--seed", "1", "--no-such-flag", "--out", out], "--no-such-flag"),
    ];
    for (args, flag) in cases {
        let res = evoc(args);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&res.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
    assert!(!out_file.exists());
}

#[test]
fn export_round_trips_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let store = tmp.path().join("store");
    small_sweep(&store, &[]);
    for file in ["series.csv", "landscape.csv", "ridge_piv.csv"] {
        let json = tmp.path().join(format!("{file}.json"));
        let back = tmp.path().join(format!("back_{file}"));
        ok(&["export", "--input", path(&store.join(file)), "--format", "json", "--out", path(&json)]);
        ok(&["export", "--input", path(&json), "--format", "csv", "--out", path(&back)]);
        assert_eq!(fs::read(store.join(file)).unwrap(), fs::read(&back).unwrap(), "{file}");
    }
}
