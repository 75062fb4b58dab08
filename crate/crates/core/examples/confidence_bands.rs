//! Repetitions, a 99% band on throughput, and the CSV/JSON output tree.

use jamsim::harness::{emit_results, metric_band, run_experiment, ExperimentConfig, Manifest, Metric, PolicyKind};

fn main() -> jamsim::Result<()> {
    let cfg = ExperimentConfig {
        policy: PolicyKind::FixedRole,
        slots: 1_000,
        repetitions: 8,
        ..ExperimentConfig::desk()
    };
    let runs = run_experiment(&cfg)?;
    let band = metric_band(&runs, Metric::Throughput, cfg.confidence_level)?;
    for t in [99, 499, 999] {
        println!("slot {t:>4}: {:.4} in [{:.4}, {:.4}]", band.mean[t], band.lower[t], band.upper[t]);
    }

    let dir = std::env::temp_dir().join("jamsim-confidence-bands");
    std::fs::create_dir_all(&dir).map_err(|e| jamsim::Error::io(&dir, e))?;
    let mut manifest = Manifest::new("example");
    manifest.groups.push(emit_results(&dir, "fixed-role", &cfg, &runs)?);
    println!("wrote {}", manifest.write(&dir)?.display());
    Ok(())
}
