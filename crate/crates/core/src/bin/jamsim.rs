use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use jamsim::harness::{self, emit_results, ExperimentConfig, Manifest, Metric, MetricsSeries, PolicyKind};
use jamsim::learning::LearnerKind;
use jamsim::routing::ProtocolKind;
use jamsim::{oracles, Error, Result};

#[derive(Parser)]
#[command(name = "jamsim", version, about = "Adversarial wireless network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run(RunArgs),
    /// Run all three routing protocols on the same seeds.
    CompareRouting(RunArgs),
    /// Run the learned policy and the fixed-role baseline on the same seeds.
    ComparePolicy(RunArgs),
    /// Run the reference-oracle checks.
    Oracle {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the report as JSON into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in profile used when no config file is given: desk or full.
    #[arg(long, default_value = "desk")]
    profile: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    slots: Option<u64>,
    /// min-distance, jamming-avoiding or jamming-aware.
    #[arg(long)]
    protocol: Option<ProtocolKind>,
    /// tabular or actor-critic.
    #[arg(long)]
    learner: Option<LearnerKind>,
    /// learned, fixed-role or all-wait.
    #[arg(long)]
    policy: Option<PolicyKind>,
    /// Slot at which red forces start acting.
    #[arg(long)]
    activation: Option<u64>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::profile(&self.profile)?,
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.reps {
            cfg.repetitions = v;
        }
        if let Some(v) = self.slots {
            cfg.slots = v;
        }
        if let Some(v) = self.protocol {
            cfg.protocol = v;
        }
        if let Some(v) = self.learner {
            cfg.learner.kind = v;
        }
        if let Some(v) = self.policy {
            cfg.policy = v;
        }
        if let Some(v) = self.activation {
            cfg.activation_slot = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize(label: &str, runs: &[MetricsSeries]) {
    let n = runs.len() as f64;
    let last = |m: Metric| runs.iter().map(|r| r.metric(m).last().copied().unwrap_or(0.0)).sum::<f64>() / n;
    println!(
        "{label:<18} reps={:<3} throughput={:.4} jammed_frac={:.4} failed_eaves_frac={:.4} utility={:.4}",
        runs.len(),
        last(Metric::Throughput),
        last(Metric::JammedFrac),
        last(Metric::FailedEavesFrac),
        last(Metric::Utility),
    );
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn finish(out: &Path, manifest: Manifest, started: Instant) -> Result<()> {
    let path = manifest.write(out)?;
    println!("wrote {} ({:.1}s)", path.display(), started.elapsed().as_secs_f64());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            prepare_out(&args.out)?;
            let runs = harness::run_experiment(&cfg)?;
            summarize(cfg.protocol.name(), &runs);
            let mut manifest = Manifest::new("run");
            manifest.groups.push(emit_results(&args.out, "run", &cfg, &runs)?);
            finish(&args.out, manifest, started)
        }
        Command::CompareRouting(args) => {
            let cfg = args.config()?;
            prepare_out(&args.out)?;
            let mut manifest = Manifest::new("compare-routing");
            for (protocol, runs) in harness::compare_routing(&cfg)? {
                summarize(protocol.name(), &runs);
                let c = ExperimentConfig { protocol, ..cfg.clone() };
                manifest.groups.push(emit_results(&args.out, protocol.name(), &c, &runs)?);
            }
            finish(&args.out, manifest, started)
        }
        Command::ComparePolicy(args) => {
            let cfg = args.config()?;
            prepare_out(&args.out)?;
            let mut manifest = Manifest::new("compare-policy");
            for (policy, runs) in harness::compare_policy(&cfg)? {
                summarize(policy.name(), &runs);
                let c = ExperimentConfig { policy, ..cfg.clone() };
                manifest.groups.push(emit_results(&args.out, policy.name(), &c, &runs)?);
            }
            finish(&args.out, manifest, started)
        }
        Command::Oracle { seed, out } => {
            let reports = oracles::run_all(seed);
            for r in &reports {
                println!("{} {:<34} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            if let Some(dir) = out {
                prepare_out(&dir)?;
                let path = dir.join("oracle.json");
                std::fs::write(&path, serde_json::to_string_pretty(&reports)? + "\n").map_err(|e| Error::io(&path, e))?;
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Error::OracleFailed(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
