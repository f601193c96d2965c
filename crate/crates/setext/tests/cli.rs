use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use setext::cli::{load_config, main_with, parse_args, run_suite};

const MEMBERS: [&str; 5] = ["geometric_series", "eds_mean", "jordan_mixed", "sequence_two_limits", "props_two_dense"];
const STATUSES: [&str; 5] = ["converged", "diverges_plus", "diverges_minus", "no_extension_evidence", "inconclusive"];

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

/// A directory holding copies of a few shipped configs.
fn suite_dir(names: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for n in names {
        fs::copy(configs().join(format!("{n}.cfg")), dir.path().join(format!("{n}.cfg"))).unwrap();
    }
    dir
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn args(v: &[&str]) -> Vec<String> {
    std::iter::once("setext").chain(v.iter().copied()).map(String::from).collect()
}

#[test]
fn suite_output_is_byte_identical_across_runs_and_job_counts() {
    let dir = suite_dir(&MEMBERS);
    let out = tempfile::tempdir().unwrap();
    let (a, b) = (out.path().join("a"), out.path().join("b"));
    let ra = run_suite(dir.path(), 1, Some(17), &a).unwrap();
    let rb = run_suite(dir.path(), 4, Some(17), &b).unwrap();
    assert_eq!(ra, rb);
    assert!(ra.iter().all(|r| r.passed()), "{ra:?}");
    let (fa, fb) = (read_all(&a), read_all(&b));
    assert_eq!(fa.len(), MEMBERS.len() + 1);
    assert_eq!(fa, fb);
}

#[test]
fn empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let code = main_with(args(&["suite", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert_eq!(code, 0);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.starts_with("config,status,value,levels,exit,pass,message"));
}

#[test]
fn malformed_member_fails_without_hiding_the_others() {
    let dir = suite_dir(&["geometric_series", "eds_mean"]);
    fs::write(dir.path().join("broken.cfg"), "experiment = series\nthis line has no equals sign\n").unwrap();
    let out = dir.path().join("out");
    let results = run_suite(dir.path(), 2, None, &out).unwrap();
    assert_eq!(results.len(), 3);
    let broken = results.iter().find(|r| r.name == "broken").unwrap();
    assert_eq!((broken.status.as_str(), broken.exit), ("error", 1));
    assert!(broken.message.contains("line 2"), "{}", broken.message);
    assert!(results.iter().filter(|r| r.name != "broken").all(|r| r.passed()));
    let code = main_with(args(&["suite", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert_eq!(code, 1);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
}

#[test]
fn empty_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.cfg");
    fs::write(&p, "# nothing here\n\n").unwrap();
    assert!(load_config(&p, None).is_err());
    assert_eq!(main_with(args(&["run", p.to_str().unwrap()])), 1);
}

#[test]
fn trace_rows_respect_max_level_and_status_set() {
    let out = tempfile::tempdir().unwrap();
    for name in ["geometric_series", "eds_mean", "jordan_mixed", "sequence_two_limits", "harmonic_diverges"] {
        let cfg = configs().join(format!("{name}.cfg"));
        let max_level: usize = fs::read_to_string(&cfg)
            .unwrap()
            .lines()
            .find_map(|l| l.strip_prefix("tol.max_level").map(|v| v.trim_start_matches([' ', '=']).trim().parse().unwrap()))
            .unwrap_or(64);
        let csv = out.path().join(format!("{name}.csv"));
        let code = main_with(args(&["run", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]));
        assert_eq!(code, 0, "{name}");
        let mut rdr = csv::Reader::from_path(&csv).unwrap();
        let headers = rdr.headers().unwrap().clone();
        assert_eq!(headers.iter().collect::<Vec<_>>(), ["level", "gap_hi", "s_value", "running_estimate", "status"]);
        let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert!(!rows.is_empty() && rows.len() <= max_level, "{name}: {} rows", rows.len());
        assert!(rows.iter().all(|r| STATUSES.contains(&&r[4])), "{name}");
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let cfg = configs().join("props_two_dense.cfg");
    let a = load_config(&cfg, None).unwrap();
    let b = load_config(&cfg, Some(99)).unwrap();
    assert_eq!(a.seed, 5);
    assert_eq!(b.seed, 99);
}

#[test]
fn argument_errors() {
    assert!(parse_args(args(&["run"])).is_err());
    assert!(parse_args(args(&["suite", "x", "--jobs", "many"])).is_err());
    assert!(parse_args(args(&["frobnicate"])).is_err());
    assert!(parse_args(args(&["suite", "x", "--jobs", "3", "--seed", "4"])).is_ok());
    assert_eq!(main_with(args(&["run", "/nonexistent/path.cfg"])), 1);
}

#[test]
fn binary_prints_the_result_line() {
    let cfg = configs().join("geometric_series.cfg");
    let out = Command::new(env!("CARGO_BIN_EXE_setext")).arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let last = stdout.lines().last().unwrap();
    let fields: Vec<&str> = last.split_whitespace().collect();
    assert_eq!(fields[..2], ["RESULT", "converged"]);
    assert!((fields[2].parse::<f64>().unwrap() - 1.0).abs() <= 1e-9);
}
