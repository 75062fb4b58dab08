//! Two nodes complete RTS, CTS, DATA and ACK with every frame decoded.

use jamsim::agents::Action;
use jamsim::mac::{MacNode, MacParams, Route};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let params = MacParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut nodes = [MacNode::new(), MacNode::new()];
    let routes = [Some(Route { flow: 0, next_hop: 1 }), None];
    let mut queue = [1u32, 0];

    let script = [
        [Action::Transmit, Action::Wait],
        [Action::Wait, Action::Receive],
        [Action::Transmit, Action::Receive],
        [Action::Wait, Action::Receive],
    ];
    for (slot, actions) in script.into_iter().enumerate() {
        let emissions: Vec<_> = (0..2).map(|i| nodes[i].emit(i, actions[i], routes[i])).collect();
        for i in 0..2 {
            // Each node decodes whatever the other one sent this slot.
            let inbound: Vec<_> = emissions[1 - i].message().copied().into_iter().collect();
            for ev in nodes[i].absorb(i, &emissions[i], &inbound, queue[i], &params, &mut rng) {
                println!("slot {slot}: node {i} got {ev:?}");
                queue = [0, 0];
            }
        }
        println!("slot {slot}: node 0 {:?}, node 1 {:?}", emissions[0], emissions[1]);
    }
}
