//! Per-action rewards and costs under the default weights, and the network
//! utility over a short logged history.

use jamsim::agents::*;

fn main() {
    let w = UtilityWeights::THROUGHPUT_FIRST;
    let rows = [
        ("transmit, decoded", utility_transmit(true, false, &w)),
        ("transmit, CTS collision", utility_transmit(true, true, &w)),
        ("receive, RTS for me", utility_receive(true, true, false, &w)),
        ("receive, queue waiting", utility_receive(false, false, true, &w)),
        ("cooperative jam, exposure 0.4", utility_cooperative_jam(0.4, true, false, &w)),
        ("adversarial jam, third of border", utility_adversarial_jam(1.0 / 3.0, true, true, &w)),
        ("wait", SlotUtility::ZERO),
    ];
    for (name, u) in rows {
        println!("{name:<34} reward {:6.2} cost {:4.1} utility {:6.2}", u.reward, u.cost, u.utility());
    }

    let history = [
        MetricComponents { delivered: 1.0, energy: 2.0, ..Default::default() },
        MetricComponents { failed_eaves_frac: 0.5, energy: 1.0, delay: 1.0, ..Default::default() },
        MetricComponents { jammed_red_frac: 1.0, energy: 1.0, ..Default::default() },
    ];
    println!("network utility over 3 slots: {:.4}", network_utility(&history, &w));
}
