//! Command-line driver: `setext run <config>` and `setext suite <dir>`.

mod config;
mod runner;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use config::{
    default_strategy, parse_config, parse_curve, parse_function, parse_oracle, parse_schedule, parse_sequence, parse_space,
    CheckKind, Expect, Experiment, ExperimentConfig, Functional, PropertyCheck, RawConfig, SeriesSpace,
};
pub use runner::{fmt_num, run_experiment, write_atomic, write_csv, Outcome, RunBody};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "setext", version, about = "Estimate extensions of set functions by Hausdorff refinement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV trace path; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every `*.cfg` in a directory.
    Suite {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for traces and `summary.csv`.
        #[arg(long, default_value = "setext-out")]
        out: PathBuf,
    },
}

pub fn parse_args<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Reads, overrides and validates a config file.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut raw = parse_config(&text)?;
    if let Some(s) = seed {
        raw.set("seed", &s.to_string());
    }
    ExperimentConfig::from_raw(&raw)
}

fn run_one(path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<Outcome> {
    let cfg = load_config(path, seed)?;
    let outcome = run_experiment(&cfg)?;
    if let Some(p) = out.map(Path::to_path_buf).or_else(|| cfg.output.clone()) {
        write_atomic(&p, |f| write_csv(f, &outcome))?;
    }
    Ok(outcome)
}

/// Outcome of one suite member.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberResult {
    pub name: String,
    pub status: String,
    pub value: Option<f64>,
    pub levels: usize,
    pub exit: i32,
    pub message: String,
}

impl MemberResult {
    pub fn passed(&self) -> bool {
        self.exit == 0
    }
}

/// Runs every `*.cfg` in `dir` (sorted by name) on `jobs` threads. Each
/// member writes `<out>/<stem>.csv`; `<out>/summary.csv` lists them all.
/// A failing member does not stop the others.
pub fn run_suite(dir: &Path, jobs: usize, seed: Option<u64>, out: &Path) -> Result<Vec<MemberResult>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let results: Vec<MemberResult> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| {
                let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let csv = out.join(format!("{name}.csv"));
                match run_one(p, seed, Some(&csv)) {
                    Ok(o) => MemberResult {
                        name,
                        message: o.notes.join("; "),
                        status: o.status,
                        value: o.value,
                        levels: o.levels,
                        exit: o.exit,
                    },
                    Err(e) => MemberResult { name, status: "error".into(), value: None, levels: 0, exit: 1, message: e.to_string() },
                }
            })
            .collect()
    });
    write_atomic(&out.join("summary.csv"), |f| {
        let mut w = csv::Writer::from_writer(f);
        let err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["config", "status", "value", "levels", "exit", "pass", "message"]).map_err(err)?;
        for r in &results {
            w.write_record([
                r.name.clone(),
                r.status.clone(),
                r.value.map_or_else(String::new, fmt_num),
                r.levels.to_string(),
                r.exit.to_string(),
                if r.passed() { "PASS" } else { "FAIL" }.to_string(),
                r.message.clone(),
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(results)
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { config, seed, out } => match run_one(&config, seed, out.as_deref()) {
            Ok(o) => {
                for n in &o.notes {
                    println!("{n}");
                }
                println!("{}", o.summary_line());
                o.exit
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Suite { dir, jobs, seed, out } => match run_suite(&dir, jobs, seed, &out) {
            Ok(results) => {
                for r in &results {
                    let v = r.value.map_or_else(|| "-".to_string(), fmt_num);
                    println!("{}: {} {} {} {}", r.name, if r.passed() { "PASS" } else { "FAIL" }, r.status, v, r.levels);
                    if !r.passed() && !r.message.is_empty() {
                        println!("  {}", r.message);
                    }
                }
                if results.iter().all(MemberResult::passed) {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    }
}
