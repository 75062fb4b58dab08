//! Learned roles against the fixed-role baseline on the same seeds.

use jamsim::harness::{compare_policy, ExperimentConfig, Metric};

fn main() -> jamsim::Result<()> {
    let cfg = ExperimentConfig {
        repetitions: 3,
        activation_slot: 0,
        ..ExperimentConfig::desk()
    };
    for (policy, runs) in compare_policy(&cfg)? {
        let n = runs.len() as f64;
        let last = |m: Metric| runs.iter().map(|r| r.metric(m).last().unwrap()).sum::<f64>() / n;
        println!(
            "{policy:<10} throughput {:.4}  jammed red {:.3}  failed eavesdrops {:.3}  utility {:.3}",
            last(Metric::Throughput),
            last(Metric::JammedFrac),
            last(Metric::FailedEavesFrac),
            last(Metric::Utility)
        );
    }
    Ok(())
}
