//! The three routing protocols on shared seeds, with permanent jammer roles.

use jamsim::harness::{compare_routing, ExperimentConfig, FixedRoles, PolicyKind};

fn main() -> jamsim::Result<()> {
    let cfg = ExperimentConfig {
        policy: PolicyKind::FixedRole,
        fixed_roles: FixedRoles { cooperative_jammers: 0.0, adversarial_jammers: 0.1 },
        repetitions: 4,
        ..ExperimentConfig::desk()
    };
    let act = cfg.activation_slot as usize;
    for (protocol, runs) in compare_routing(&cfg)? {
        let n = runs.len() as f64;
        let pre = runs.iter().map(|r| r.window_rate(0, act)).sum::<f64>() / n;
        let post = runs.iter().map(|r| r.window_rate(act, r.len())).sum::<f64>() / n;
        let eaves = runs.iter().map(|r| r.failed_eaves_frac.last().unwrap()).sum::<f64>() / n;
        println!("{protocol:<17} before {pre:.4} after {post:.4} pkt/slot, failed eavesdrops {eaves:.3}");
    }
    Ok(())
}
