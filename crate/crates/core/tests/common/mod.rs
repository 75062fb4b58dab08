#![allow(dead_code)]

use jamsim::agents::{Action, UtilityWeights};
use jamsim::geometry::{Flow, MobilityState, NetworkLayout, Position};
use jamsim::harness::{ExperimentConfig, MetricsSeries, PolicyKind, World};

use Action::{AdversarialJam as AJ, CooperativeJam as CJ, Receive as R, Transmit as T, Wait as W};

/// Ten scripted slots for nodes [source, destination, helper].
pub const SCRIPT: [[Action; 3]; 10] = [
    [T, W, W],
    [W, R, W],
    [T, R, CJ],
    [W, W, AJ],
    [R, W, W],
    [T, W, W],
    [W, R, W],
    [T, R, W],
    [CJ, W, W],
    [W, W, W],
];

/// Hand-derived per-slot (delivered, failed eavesdrop share, jammed red
/// share, energy, delay) for [`SCRIPT`] on [`toy_world`].
///
/// Slots 0-2 and 5-7 are two RTS/CTS/DATA handshakes. The source has a
/// packet every slot, so its Receive (slot 4) and cooperative jam (slot 8)
/// each cost one delay unit. Red forces act from slot 2: the eavesdropper
/// sits 1803 m from both the source and the helper, so the helper's jamming
/// in slot 2 drowns the DATA frame (SIR 1); in slot 7 the frame is clean.
/// In slot 3 the helper's adversarial jamming reaches the eavesdropper
/// (1803 m) but not the red transmitter (12.5 km), one of two active.
pub const EXPECTED: [[f64; 5]; 10] = [
    [0.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 2.0, 0.0],
    [0.0, 0.0, 0.5, 1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 1.0],
    [0.0, 0.0, 0.0, 0.0, 0.0],
];

pub fn toy_config() -> ExperimentConfig {
    let base = ExperimentConfig {
        n_blue: 3,
        n_flows: 1,
        red_eavesdroppers: 1,
        red_jammers: 0,
        red_transmitters: 1,
        arrival_prob: 1.0,
        policy: PolicyKind::AllWait,
        mobility: MobilityState { speed: 0.0, slot_duration: 1.0 },
        slots: 10,
        activation_slot: 2,
        repetitions: 1,
        ..ExperimentConfig::desk()
    };
    let mut channel = base.channel_params();
    channel.shadowing_sigma_db = 0.0;
    ExperimentConfig { channel: Some(channel), ..base }
}

pub fn toy_world() -> World {
    let layout = NetworkLayout {
        radius: 10_000.0,
        blue_nodes: vec![Position::new(0.0, 0.0), Position::new(1000.0, 0.0), Position::new(-3000.0, 0.0)],
        red_eavesdroppers: vec![Position::new(-1500.0, 1000.0)],
        red_jammers: vec![],
        red_transmitters: vec![Position::new(9500.0, 0.0)],
        flows: vec![Flow { source: 0, destination: 1 }],
    };
    World::with_layout(&toy_config(), 7, layout).expect("toy layout is valid")
}

/// Runs the script and returns the logged series.
pub fn run_toy() -> MetricsSeries {
    let mut world = toy_world();
    let records = SCRIPT
        .iter()
        .map(|a| world.run_slot_with(a).expect("scripted slot"))
        .collect();
    MetricsSeries::from_records(7, records, &toy_config().weights)
}

/// Utility aggregate evaluated column by column: each metric summed over
/// the horizon, weighted, and divided by the horizon once.
pub fn spreadsheet_utility(rows: &[[f64; 5]], w: &UtilityWeights) -> f64 {
    let col = |k: usize| rows.iter().map(|r| r[k]).sum::<f64>();
    let total = w.w_t * col(0) + w.w_cj * col(1) + w.w_aj * col(2) - w.w_e * col(3) - w.w_d * col(4);
    total / rows.len() as f64
}
