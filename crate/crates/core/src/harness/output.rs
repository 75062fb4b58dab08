use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::Action;
use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::stats::{metric_band, ConfidenceBand, Metric, MetricsSeries};

pub const RUN_HEADER: [&str; 5] = ["slot", "throughput", "jammed_frac", "failed_eaves_frac", "utility"];
pub const AGGREGATE_HEADER: [&str; 4] = ["slot", "mean", "lo", "hi"];

/// One labelled group of repetitions (a protocol or a policy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub label: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub run_files: Vec<PathBuf>,
    pub raw_files: Vec<PathBuf>,
    pub aggregate_files: Vec<PathBuf>,
}

/// Everything needed to reproduce the emitted files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub groups: Vec<GroupEntry>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            groups: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_run(path: &Path, run: &MetricsSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RUN_HEADER).map_err(csv_err(path))?;
    for t in 0..run.len() {
        w.write_record([
            run.records[t].slot.to_string(),
            run.throughput[t].to_string(),
            run.jammed_frac[t].to_string(),
            run.failed_eaves_frac[t].to_string(),
            run.utility[t].to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_raw(path: &Path, run: &MetricsSeries) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec![
        "slot",
        "delivered",
        "injected",
        "eaves_attempts",
        "eaves_failed",
        "red_active",
        "red_jammed",
        "blue_jammed",
        "energy",
        "delay",
        "node_utility",
    ];
    header.extend(["n_transmit", "n_receive", "n_coop_jam", "n_adv_jam", "n_wait"]);
    debug_assert_eq!(Action::COUNT, 5);
    w.write_record(&header).map_err(csv_err(path))?;
    for r in &run.records {
        let mut row = vec![
            r.slot.to_string(),
            r.components.delivered.to_string(),
            r.injected.to_string(),
            r.eaves_attempts.to_string(),
            r.eaves_failed.to_string(),
            r.red_active.to_string(),
            r.red_jammed.to_string(),
            r.blue_jammed.to_string(),
            r.components.energy.to_string(),
            r.components.delay.to_string(),
            r.node_utility.to_string(),
        ];
        row.extend(r.action_counts.iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_band(path: &Path, band: &ConfidenceBand) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(AGGREGATE_HEADER).map_err(csv_err(path))?;
    for t in 0..band.len() {
        w.write_record([t.to_string(), band.mean[t].to_string(), band.lower[t].to_string(), band.upper[t].to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes per-run, raw and (with at least two runs) aggregate CSV files for
/// one group under `dir/label/`, returning its manifest entry. File paths in
/// the entry are relative to `dir`.
pub fn emit_results(dir: &Path, label: &str, config: &ExperimentConfig, runs: &[MetricsSeries]) -> Result<GroupEntry> {
    let group_dir = dir.join(label);
    fs::create_dir_all(&group_dir).map_err(|e| Error::io(&group_dir, e))?;
    let mut entry = GroupEntry {
        label: label.to_string(),
        config: config.resolved(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        run_files: Vec::new(),
        raw_files: Vec::new(),
        aggregate_files: Vec::new(),
    };
    for run in runs {
        let name = PathBuf::from(label).join(format!("run_{}.csv", run.seed));
        write_run(&dir.join(&name), run)?;
        entry.run_files.push(name);
        let name = PathBuf::from(label).join(format!("raw_{}.csv", run.seed));
        write_raw(&dir.join(&name), run)?;
        entry.raw_files.push(name);
    }
    if runs.len() >= 2 {
        for metric in Metric::ALL {
            let band = metric_band(runs, metric, config.confidence_level)?;
            let name = PathBuf::from(label).join(format!("aggregate_{}.csv", metric.name()));
            write_band(&dir.join(&name), &band)?;
            entry.aggregate_files.push(name);
        }
    }
    Ok(entry)
}

/// Reads one column of a per-run CSV by header name.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = r.headers().map_err(csv_err(path))?.clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::InsufficientData(format!("{}: no column `{column}`", path.display())))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let v = rec[idx]
            .parse::<f64>()
            .map_err(|e| Error::InsufficientData(format!("{}: bad value `{}`: {e}", path.display(), &rec[idx])))?;
        out.push(v);
    }
    Ok(out)
}
