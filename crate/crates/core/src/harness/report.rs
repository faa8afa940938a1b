//! Aggregation across runs and artifact files.
//!
//! A result directory holds `regret.csv` (per-round mean and sample standard
//! deviation of cumulative regret), `runs.csv` (one column per run),
//! `summary.json` and `timing.json`. Everything except the timing file is a
//! pure function of the configuration and master seed.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{RoundSink, RunResult};
use crate::error::{Error, Result};
use crate::model::{RegretCurve, RegretMode};

pub const REGRET_CSV: &str = "regret.csv";
pub const RUNS_CSV: &str = "runs.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const TIMING_JSON: &str = "timing.json";

/// Per-round mean and sample standard deviation across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Only one run: `std` is zero by convention.
    pub single_run: bool,
}

/// Mean and `n - 1` standard deviation; the deviation of one value is 0.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn aggregate(curves: &[RegretCurve]) -> Result<Aggregate> {
    let Some(first) = curves.first() else {
        return Err(Error::arg("aggregate needs at least one run"));
    };
    let horizon = first.horizon();
    if let Some(bad) = curves.iter().find(|c| c.horizon() != horizon) {
        return Err(Error::arg(format!(
            "runs have mismatched horizons ({horizon} and {})",
            bad.horizon()
        )));
    }
    let mut mean = Vec::with_capacity(horizon);
    let mut std = Vec::with_capacity(horizon);
    let mut column = vec![0.0; curves.len()];
    for t in 0..horizon {
        for (x, c) in column.iter_mut().zip(curves) {
            *x = c.cumulative()[t];
        }
        let (m, s) = mean_and_std(&column);
        mean.push(m);
        std.push(s);
    }
    Ok(Aggregate {
        mean,
        std,
        single_run: curves.len() == 1,
    })
}

/// `"155.4 ± 14.1"`.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.1} ± {std:.1}")
}

/// Deterministic run record stored as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub policy: String,
    pub family: String,
    pub oracle: String,
    pub regret_mode: RegretMode,
    pub horizon: u64,
    pub n_runs: usize,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub final_mean: f64,
    pub final_std: f64,
    pub display: String,
    pub single_run: bool,
    pub benchmark_value: f64,
    pub config_fingerprint: String,
    pub instance_fingerprint: String,
}

impl Summary {
    pub fn from_result(r: &RunResult) -> Self {
        Summary {
            policy: r.policy.name().to_string(),
            family: r.family.clone(),
            oracle: r.oracle.clone(),
            regret_mode: r.mode,
            horizon: r.horizon,
            n_runs: r.curves.len(),
            master_seed: r.master_seed,
            seeds: r.seeds(),
            final_mean: r.final_mean(),
            final_std: r.final_std(),
            display: format_mean_std(r.final_mean(), r.final_std()),
            single_run: r.aggregate.single_run,
            benchmark_value: r.benchmark_value,
            config_fingerprint: r.config_fingerprint.clone(),
            instance_fingerprint: r.instance_fingerprint.clone(),
        }
    }

    /// One line for terminals.
    pub fn line(&self) -> String {
        format!(
            "{} on {} (T={}, runs={}): {}",
            self.policy, self.family, self.horizon, self.n_runs, self.display
        )
    }
}

type CsvWriter = csv::Writer<BufWriter<File>>;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_writer(path: PathBuf) -> Result<(CsvWriter, PathBuf)> {
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((csv::Writer::from_writer(BufWriter::new(f)), path))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Simulation(format!("{}: {other:?}", path.display())),
    }
}

fn keep_round(t: u64, horizon: u64, stride: u64) -> bool {
    stride > 0 && (t % stride == 0 || t == horizon)
}

/// Streams both CSV files round by round.
pub struct CsvSink {
    regret: (CsvWriter, PathBuf),
    runs: Option<(CsvWriter, PathBuf)>,
    horizon: u64,
    stride: u64,
    last: (f64, f64),
    row: Vec<String>,
}

impl CsvSink {
    pub fn create(dir: &Path, n_runs: usize, horizon: u64, stride: u64) -> Result<Self> {
        create_dir(dir)?;
        let mut regret = csv_writer(dir.join(REGRET_CSV))?;
        regret
            .0
            .write_record(["round", "mean_cum_regret", "std_cum_regret"])
            .map_err(|e| csv_err(&regret.1, e))?;
        let runs_path = dir.join(RUNS_CSV);
        let runs = if stride > 0 {
            let mut w = csv_writer(runs_path)?;
            let header: Vec<String> = std::iter::once("round".to_string())
                .chain((0..n_runs).map(|r| format!("run{r}")))
                .collect();
            w.0.write_record(&header).map_err(|e| csv_err(&w.1, e))?;
            Some(w)
        } else {
            // a stale file from an earlier run would be misleading
            match std::fs::remove_file(&runs_path) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(Error::io(runs_path, e)),
            }
            None
        };
        Ok(CsvSink {
            regret,
            runs,
            horizon,
            stride,
            last: (0.0, 0.0),
            row: Vec::with_capacity(n_runs + 1),
        })
    }

    /// Flushes the files; returns the final mean and standard deviation.
    pub fn finish(mut self) -> Result<(f64, f64)> {
        self.regret.0.flush().map_err(|e| Error::io(&self.regret.1, e))?;
        if let Some((w, p)) = self.runs.as_mut() {
            w.flush().map_err(|e| Error::io(p.as_path(), e))?;
        }
        Ok(self.last)
    }
}

impl RoundSink for CsvSink {
    fn record(&mut self, t: u64, cumulative: &[f64]) -> Result<()> {
        let (m, s) = mean_and_std(cumulative);
        self.last = (m, s);
        self.regret
            .0
            .write_record([t.to_string(), m.to_string(), s.to_string()])
            .map_err(|e| csv_err(&self.regret.1, e))?;
        if keep_round(t, self.horizon, self.stride) {
            if let Some((w, p)) = self.runs.as_mut() {
                self.row.clear();
                self.row.push(t.to_string());
                self.row.extend(cumulative.iter().map(f64::to_string));
                w.write_record(&self.row).map_err(|e| csv_err(p, e))?;
            }
        }
        Ok(())
    }
}

pub fn write_summary(dir: &Path, summary: &Summary, wall_clock_secs: f64) -> Result<()> {
    create_dir(dir)?;
    let path = dir.join(SUMMARY_JSON);
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    let path = dir.join(TIMING_JSON);
    let timing = serde_json::json!({ "wall_clock_secs": wall_clock_secs });
    std::fs::write(&path, format!("{timing}\n")).map_err(|e| Error::io(&path, e))
}

/// Writes all artifacts of a finished experiment into `dir`, creating it if
/// needed. Produces the same bytes as streaming the run with [`CsvSink`].
pub fn emit_report(result: &RunResult, dir: &Path) -> Result<Summary> {
    let mut sink = CsvSink::create(dir, result.curves.len(), result.horizon, result.per_run_stride)?;
    let mut column = vec![0.0; result.curves.len()];
    for t in 0..result.horizon as usize {
        for (x, c) in column.iter_mut().zip(&result.curves) {
            *x = c.cumulative()[t];
        }
        sink.record(t as u64 + 1, &column)?;
    }
    sink.finish()?;
    let summary = Summary::from_result(result);
    write_summary(dir, &summary, result.wall_clock_secs)?;
    Ok(summary)
}

pub fn read_summary(dir: &Path) -> Result<Summary> {
    let path = dir.join(SUMMARY_JSON);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}
