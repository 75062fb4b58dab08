use std::fs;
use std::path::Path;
use std::process::Command;

use jamsim::harness::output::{read_column, AGGREGATE_HEADER, RUN_HEADER};
use jamsim::harness::{self, emit_results, ExperimentConfig, Manifest, Metric, PolicyKind};
use jamsim::Error;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n_blue: 10,
        slots: 60,
        activation_slot: 20,
        repetitions: 3,
        seed: 5,
        policy: PolicyKind::FixedRole,
        ..ExperimentConfig::desk()
    }
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn emit(dir: &Path, cfg: &ExperimentConfig) -> Manifest {
    let runs = harness::run_experiment(cfg).unwrap();
    let mut manifest = Manifest::new("run");
    manifest.groups.push(emit_results(dir, "run", cfg, &runs).unwrap());
    manifest.write(dir).unwrap();
    manifest
}

#[test]
fn ten_slot_run_has_ten_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { slots: 10, repetitions: 1, ..small() };
    let manifest = emit(dir.path(), &cfg);
    let group = &manifest.groups[0];
    assert!(group.aggregate_files.is_empty());
    let text = fs::read_to_string(dir.path().join(&group.run_files[0])).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], RUN_HEADER.join(","));
    assert_eq!(read_column(&dir.path().join(&group.run_files[0]), "slot").unwrap(), (0..10).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    emit(a.path(), &small());
    emit(b.path(), &small());
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.len(), 1 + 3 * 2 + Metric::ALL.len());
    assert_eq!(ta, tb);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    emit(dir.path(), &small());
    let loaded = Manifest::load(&dir.path().join("manifest.json")).unwrap();
    let group = &loaded.groups[0];
    assert_eq!(group.seeds, vec![5, 6, 7]);
    let again = tempfile::tempdir().unwrap();
    emit(again.path(), &group.config);
    assert_eq!(tree(dir.path()), tree(again.path()));
}

#[test]
fn aggregates_match_reaggregation_of_run_files() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = emit(dir.path(), &small());
    let group = &manifest.groups[0];
    let n = group.run_files.len() as f64;
    let t = StudentsT::new(0.0, 1.0, n - 1.0).unwrap().inverse_cdf(0.995);
    for metric in Metric::ALL {
        let columns: Vec<Vec<f64>> = group
            .run_files
            .iter()
            .map(|f| read_column(&dir.path().join(f), metric.name()).unwrap())
            .collect();
        let agg = dir.path().join("run").join(format!("aggregate_{}.csv", metric.name()));
        let text = fs::read_to_string(&agg).unwrap();
        assert_eq!(text.lines().next().unwrap(), AGGREGATE_HEADER.join(","));
        let (mean, lo, hi) = (read_column(&agg, "mean").unwrap(), read_column(&agg, "lo").unwrap(), read_column(&agg, "hi").unwrap());
        for k in 0..mean.len() {
            let xs: Vec<f64> = columns.iter().map(|c| c[k]).collect();
            let m = xs.iter().sum::<f64>() / n;
            let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let half = t * sd / n.sqrt();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
            assert!(close(mean[k], m), "{} slot {k}", metric.name());
            assert!(close(lo[k], m - half) && close(hi[k], m + half), "{} slot {k}", metric.name());
        }
    }
}

#[test]
fn unwritable_output_reports_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let runs = harness::run_experiment(&ExperimentConfig { slots: 5, repetitions: 1, ..small() }).unwrap();
    match emit_results(&blocker, "run", &small(), &runs) {
        Err(e @ Error::Io { .. }) => {
            assert!(e.to_string().contains("file"));
            assert_eq!(e.exit_code(), 4);
        }
        other => panic!("expected an i/o error, got {other:?}"),
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let err = ExperimentConfig::from_toml_str("n_blue = 10\nbogus = 1\n").unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("bogus"));
    assert!(ExperimentConfig::from_toml_str("[mac]\nrts_retry = 3\n").is_err());
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_jamsim")).args(args).output().unwrap()
}

#[test]
fn cli_run_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let out_s = out.to_str().unwrap();
    let o = cli(&["run", "--slots", "30", "--reps", "2", "--seed", "9", "--policy", "fixed-role", "--out", out_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = Manifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(m.command, "run");
    assert_eq!(m.groups[0].seeds, vec![9, 10]);
    assert_eq!(m.groups[0].config.slots, 30);
}

#[test]
fn cli_compare_routing_uses_shared_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cli(&["compare-routing", "--slots", "20", "--reps", "2", "--policy", "fixed-role", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = Manifest::load(&dir.path().join("manifest.json")).unwrap();
    let labels: Vec<&str> = m.groups.iter().map(|g| g.label.as_str()).collect();
    assert_eq!(labels, ["min-distance", "jamming-avoiding", "jamming-aware"]);
    assert!(m.groups.iter().all(|g| g.seeds == m.groups[0].seeds));
}

#[test]
fn cli_exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "unknown_key = 1\n").unwrap();
    assert_eq!(cli(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(cli(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(cli(&["run", "--reps", "0", "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
}
