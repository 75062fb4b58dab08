//! Tabular Q-learning on a two-state MDP, converging to value iteration.

use jamsim::agents::Action;
use jamsim::oracles::ToyMdp;

fn main() {
    let mdp = ToyMdp::two_by_two();
    let vi = mdp.value_iteration(1e-13);
    for sweeps in [10, 100, 1000] {
        let q = mdp.tabular_sweeps(0.5, sweeps);
        let err = (0..2)
            .flat_map(|s| (0..2).map(move |a| (s, a)))
            .map(|(s, a)| (q.get(&s, Action::from_index(a)) - vi[s][a]).abs())
            .fold(0.0f64, f64::max);
        println!("{sweeps:>5} sweeps: max error {err:.3e}");
    }
    println!("value iteration: {vi:?}");
}
