//! Deploys the full-scale network and walks it for a few thousand slots.

use jamsim::geometry::{brownian_step, deploy_network, MobilityState};
use jamsim::rng::{stream, Stream};

fn main() -> jamsim::Result<()> {
    let layout = deploy_network(40, 3, 3, 4, 10_000.0, 5, 42)?;
    println!("{} blue, {} red, flows {:?}", layout.n_blue(), layout.n_red(), layout.flows);

    let mob = MobilityState { speed: 5.0, slot_duration: 1.0 };
    let mut rng = stream(42, Stream::Mobility);
    let mut pos = layout.blue_nodes.clone();
    for slot in 1..=3_000 {
        for p in pos.iter_mut() {
            *p = brownian_step(*p, &mob, layout.radius, &mut rng);
        }
        if slot % 1_000 == 0 {
            let mean_r = pos.iter().map(|p| p.norm()).sum::<f64>() / pos.len() as f64;
            let moved = pos.iter().zip(&layout.blue_nodes).map(|(a, b)| a.distance(b)).sum::<f64>() / pos.len() as f64;
            println!("slot {slot:>5}: mean radius {mean_r:7.1} m, mean displacement {moved:6.1} m");
        }
    }
    Ok(())
}
