use std::f64::consts::PI;

use jamsim::agents::Action;
use jamsim::channel::{self, ChannelParams};
use jamsim::geometry::{self, MobilityState, Position};
use jamsim::harness::stats::confidence_band;
use jamsim::learning::{softmax, ActorCriticConfig, Experience, QTable};
use jamsim::oracles::{self, Candidate, ToyMdp};
use jamsim::routing::ProtocolKind;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RADIUS: f64 = 10_000.0;

fn in_disk(radius: f64) -> impl Strategy<Value = Position> {
    (0.0..1.0f64, 0.0..2.0 * PI).prop_map(move |(u, phi)| Position::polar(radius * u.sqrt(), phi))
}

fn candidate(slot: usize) -> impl Strategy<Value = Candidate> {
    (
        (-2500.0..2500.0f64, -2500.0..2500.0f64),
        prop_oneof![1 => Just(0.0), 4 => (0.0..20_000.0f64).prop_map(f64::round)],
        any::<bool>(),
        0..3usize,
        (-2500.0..2500.0f64, -2500.0..2500.0f64),
    )
        .prop_map(move |((dx, dy), dist, jammed, kind, (ox, oy))| {
            let position = Position::new(dx, dy);
            let onward = match kind {
                0 => None,
                1 => Some((0, Position::ORIGIN)),
                _ => Some((100 + slot, Position::new(dx + ox, dy + oy))),
            };
            Candidate {
                id: slot + 1,
                position,
                dist_to_dest: dist,
                jammed,
                onward,
            }
        })
}

fn candidates() -> impl Strategy<Value = Vec<Candidate>> {
    (0..8usize).prop_flat_map(|n| (0..n).map(candidate).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exposure_matches_border_sampling(
        tx in in_disk(RADIUS),
        cj in in_disk(RADIUS),
        rx_range in 500.0..8000.0f64,
        cj_range in 500.0..12_000.0f64,
    ) {
        let n = 100_000;
        let (_, denom) = oracles::sampled_exposure_counts(tx, rx_range, cj, cj_range, RADIUS, n);
        // Too few grid points in the reception arc to resolve 0.005.
        prop_assume!(denom >= 2_000);
        let exact = geometry::eavesdropper_exposure(tx, rx_range, cj, cj_range, RADIUS);
        let sampled = oracles::sampled_exposure(tx, rx_range, cj, cj_range, RADIUS, n);
        prop_assert!((exact - sampled).abs() <= 0.005, "exact {exact} sampled {sampled}");
        prop_assert!((0.0..=1.0).contains(&exact));
    }

    #[test]
    fn jam_fraction_matches_border_sampling(jammer in in_disk(RADIUS), range in 100.0..25_000.0f64) {
        let exact = geometry::adversarial_jam_fraction(jammer, range, RADIUS);
        let sampled = oracles::sampled_jam_fraction(jammer, range, RADIUS, 100_000);
        prop_assert!((exact - sampled).abs() <= 0.005, "exact {exact} sampled {sampled}");
    }

    #[test]
    fn border_jammer_covers_a_third(phi in 0.0..2.0 * PI, radius in 1.0..1e6f64) {
        let f = geometry::adversarial_jam_fraction(Position::polar(radius, phi), radius, radius);
        prop_assert!((f - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn angle_matches_atan2(j in in_disk(RADIUS), i in in_disk(RADIUS), k in in_disk(RADIUS)) {
        prop_assume!(j.distance(&i) > 1e-3 && j.distance(&k) > 1e-3);
        let a = geometry::angle_at(j, i, k).unwrap();
        prop_assert!((a - oracles::angle_atan2(j, i, k)).abs() < 1e-6);
        prop_assert!((0.0..=PI).contains(&a));
    }

    #[test]
    fn walks_stay_in_disk(start in in_disk(RADIUS), seed in any::<u64>(), speed in 0.0..3000.0f64) {
        let mob = MobilityState { speed, slot_duration: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = start;
        for _ in 0..200 {
            p = geometry::brownian_step(p, &mob, RADIUS, &mut rng);
            prop_assert!(p.norm() <= RADIUS * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sinr_falls_with_interference(signal in 1e-15..1e-6f64, a in 0.0..1e-6f64, b in 0.0..1e-6f64) {
        let noise = channel::dbm_to_watts(-100.0);
        prop_assert!(channel::sinr(signal, &[a], noise) >= channel::sinr(signal, &[a, b], noise));
    }

    #[test]
    fn power_falls_with_distance(d1 in 1.0..20_000.0f64, extra in 0.0..20_000.0f64) {
        let ch = ChannelParams::for_range(5000.0);
        prop_assert!(ch.mean_received_power(d1) >= ch.mean_received_power(d1 + extra));
    }

    #[test]
    fn band_brackets_the_mean(rows in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 5), 2..12)) {
        let views: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let band = confidence_band(&views, 0.99).unwrap();
        for t in 0..5 {
            prop_assert!(band.lower[t] <= band.mean[t] && band.mean[t] <= band.upper[t]);
        }
    }

    #[test]
    fn q_update_matches_hand_evaluation(
        alpha in 0.0..1.0f64,
        gamma in 0.0..1.0f64,
        old in -50.0..50.0f64,
        p in -20.0..20.0f64,
        next in prop::array::uniform5(-50.0..50.0f64),
        a in 0..Action::COUNT,
    ) {
        let action = Action::from_index(a);
        let mut table = QTable::new(alpha, gamma);
        table.set(0u8, action, old);
        for (b, q) in next.iter().enumerate() {
            table.set(1u8, Action::from_index(b), *q);
        }
        table.q_update(&0, action, p, &1);
        let best = next.iter().copied().fold(f64::MIN, f64::max);
        let hand = (1.0 - alpha) * old + alpha * (p + gamma * best);
        prop_assert!((table.get(&0, action) - hand).abs() <= 1e-12);
    }

    #[test]
    fn tabular_reaches_value_iteration(
        rewards in prop::array::uniform4(-5.0..5.0f64),
        next in prop::array::uniform4(0..2usize),
        gamma in 0.1..0.9f64,
    ) {
        let mdp = ToyMdp {
            next: vec![vec![next[0], next[1]], vec![next[2], next[3]]],
            reward: vec![vec![rewards[0], rewards[1]], vec![rewards[2], rewards[3]]],
            gamma,
        };
        let vi = mdp.value_iteration(1e-13);
        let table = mdp.tabular_sweeps(0.5, 2_000);
        for s in 0..2 {
            for a in 0..2 {
                prop_assert!((table.get(&s, Action::from_index(a)) - vi[s][a]).abs() < 1e-6);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn next_hop_matches_exhaustive_scan(at in in_disk(RADIUS), cands in candidates()) {
        for protocol in ProtocolKind::ALL {
            let view = if protocol == ProtocolKind::MinDistance { oracles::unjammed(&cands) } else { cands.clone() };
            let table = oracles::table_from_candidates(0, at, &view);
            prop_assert_eq!(
                oracles::library_next_hop(&table, protocol),
                oracles::exhaustive_next_hop(0, at, &view, protocol),
                "{}", protocol
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn distance_vector_matches_dijkstra(seed in any::<u64>(), n in 5..25usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = oracles::random_connected_graph(&mut rng, n, 5000.0, 2500.0);
        let dest = (seed % n as u64) as usize;
        let dv = oracles::converge_distance_vector(&pts, 2500.0, dest, 200);
        let sp = oracles::dijkstra(&pts, 2500.0, dest);
        for (a, b) in dv.iter().zip(&sp) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0), "dv {a} dijkstra {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradients_match_finite_differences(seed in any::<u64>(), a in 0..Action::COUNT, n_in in 2..6usize) {
        let cfg = ActorCriticConfig { hidden: [6, 5], ..ActorCriticConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = oracles::random_params(n_in, &cfg, &mut rng);
        let state: Vec<f64> = (0..n_in).map(|k| ((seed >> k) % 7) as f64 / 7.0 - 0.4).collect();
        prop_assume!(!oracles::near_kink(&params.actor, &state, 1e-3) && !oracles::near_kink(&params.critic, &state, 1e-3));
        let err = oracles::gradient_error(&params, &state, Action::from_index(a));
        prop_assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn policy_stays_a_distribution(seed in any::<u64>(), utilities in prop::collection::vec(-20.0..20.0f64, 1..200)) {
        let cfg = ActorCriticConfig { hidden: [8, 8], ..ActorCriticConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = oracles::random_params(4, &cfg, &mut rng);
        for (k, u) in utilities.iter().enumerate() {
            let exp = Experience {
                state: vec![(k % 2) as f64, 1.0, 0.0, (k % 3) as f64],
                action: Action::from_index(k % Action::COUNT),
                utility: *u,
                next_state: vec![1.0, 0.0, (k % 2) as f64, 0.0],
            };
            params.critic_update(&exp).unwrap();
            params.actor_update(&exp).unwrap();
            let pi = params.policy(&exp.state).unwrap();
            prop_assert!(params.actor.is_finite() && params.critic.is_finite(), "diverged at update {k}: {pi:?}");
            prop_assert!(pi.iter().all(|p| *p >= 0.0));
            prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_of_finite_logits(z in prop::collection::vec(-1e300..1e300f64, 1..8)) {
        let pi = softmax(&z);
        prop_assert!(pi.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
