//! Experiment orchestration: configuration, the slot loop, repetitions,
//! confidence bands and file output.
//!
//! A slot runs in a fixed phase order: mobility and arrivals, jam sensing
//! and one routing round, action selection, MAC emissions with channel
//! resolution, red-force outcomes, utilities and learner updates, metric
//! logging, and the action broadcast.

pub mod config;
pub mod output;
pub mod stats;
pub mod world;

use rayon::prelude::*;

pub use config::{ExperimentConfig, FixedRoles, PolicyKind};
pub use output::{emit_results, GroupEntry, Manifest};
pub use stats::{confidence_band, metric_band, ConfidenceBand, Metric, MetricsSeries};
pub use world::{Role, SlotRecord, World};

use crate::error::Result;
use crate::routing::ProtocolKind;

/// Runs one repetition to the configured horizon.
pub fn run_repetition(cfg: &ExperimentConfig, seed: u64) -> Result<MetricsSeries> {
    let mut world = World::new(cfg, seed)?;
    let mut records = Vec::with_capacity(cfg.slots as usize);
    for _ in 0..cfg.slots {
        records.push(world.run_slot()?);
    }
    Ok(MetricsSeries::from_records(seed, records, &cfg.weights))
}

/// All repetitions; repetition k uses `cfg.seed + k`. Repetitions run in
/// parallel but the result is ordered by k and independent of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsSeries>> {
    cfg.validate()?;
    (0..cfg.repetitions as u64)
        .into_par_iter()
        .map(|k| run_repetition(cfg, cfg.seed.wrapping_add(k)))
        .collect()
}

/// The same scenarios (seeds) under each routing protocol.
pub fn compare_routing(cfg: &ExperimentConfig) -> Result<Vec<(ProtocolKind, Vec<MetricsSeries>)>> {
    ProtocolKind::ALL
        .iter()
        .map(|p| {
            let c = ExperimentConfig {
                protocol: *p,
                ..cfg.clone()
            };
            run_experiment(&c).map(|runs| (*p, runs))
        })
        .collect()
}

/// The same scenarios under the learned policy and the fixed-role baseline.
pub fn compare_policy(cfg: &ExperimentConfig) -> Result<Vec<(PolicyKind, Vec<MetricsSeries>)>> {
    [PolicyKind::Learned, PolicyKind::FixedRole]
        .iter()
        .map(|p| {
            let c = ExperimentConfig {
                policy: *p,
                ..cfg.clone()
            };
            run_experiment(&c).map(|runs| (*p, runs))
        })
        .collect()
}
