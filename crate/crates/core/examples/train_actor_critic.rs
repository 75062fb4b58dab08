//! Trains per-node actor-critic learners in a small network, then saves
//! and restores one node's weights.

use jamsim::agents::Action;
use jamsim::harness::{ExperimentConfig, PolicyKind, World};
use jamsim::learning::ActorCriticParams;

fn main() -> jamsim::Result<()> {
    let mut cfg = ExperimentConfig {
        n_blue: 12,
        n_flows: 3,
        policy: PolicyKind::Learned,
        activation_slot: 500,
        ..ExperimentConfig::desk()
    };
    cfg.learner.actor_critic.hidden = [32, 32];
    let mut world = World::new(&cfg, 3)?;
    let mut delivered = 0.0;
    let mut counts = [0u32; Action::COUNT];
    for slot in 1..=2_000u32 {
        let r = world.run_slot()?;
        delivered += r.components.delivered;
        for (c, n) in counts.iter_mut().zip(r.action_counts) {
            *c += n;
        }
        if slot % 500 == 0 {
            println!("slot {slot}: {delivered} delivered, actions {counts:?}");
            counts = [0; Action::COUNT];
        }
    }

    let params = world.learners()[0].actor_critic().expect("actor-critic learner");
    let json = params.to_json()?;
    let back = ActorCriticParams::from_json(&json)?;
    println!("snapshot: {} bytes, restores exactly: {}", json.len(), &back == params);
    Ok(())
}
