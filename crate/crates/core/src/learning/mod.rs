//! Per-node role learners: tabular Q-learning and actor-critic deep
//! Q-learning with experience replay, both driven by an epsilon-greedy
//! schedule over the one-hot observation.

pub mod actor_critic;
pub mod network;
pub mod qtable;
pub mod replay;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use actor_critic::{replay_cycle, ActorCriticConfig, ActorCriticParams};
pub use network::{softmax, Mlp};
pub use qtable::QTable;
pub use replay::{Experience, ReplayMemory};

use crate::agents::Action;
use crate::error::Result;
use crate::mac::{one_hot_encode, AgentObservation, ObservationCaps};
use crate::rng::SimRng;

/// Piecewise-constant exploration rate: `steps[k].1` applies from slot
/// `steps[k].0` until the next breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsilonSchedule {
    pub steps: Vec<(u64, f64)>,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            steps: vec![(0, 1.0), (500, 0.2), (800, 0.01)],
        }
    }
}

impl EpsilonSchedule {
    pub fn epsilon(&self, slot: u64) -> f64 {
        self.steps
            .iter()
            .take_while(|(start, _)| *start <= slot)
            .last()
            .map_or(1.0, |(_, eps)| *eps)
    }
}

/// Index of the largest score, first index on ties.
pub fn greedy(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy choice over the five action scores. Always consumes one
/// uniform draw, plus one more when exploring.
pub fn select_action<R: Rng + ?Sized>(scores: &[f64; Action::COUNT], epsilon: f64, rng: &mut R) -> Action {
    if rng.random::<f64>() < epsilon {
        Action::from_index(rng.random_range(0..Action::COUNT))
    } else {
        Action::from_index(greedy(scores))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    Tabular,
    ActorCritic,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Tabular => "tabular",
            LearnerKind::ActorCritic => "actor-critic",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tabular" => Ok(LearnerKind::Tabular),
            "actor-critic" | "dqn" => Ok(LearnerKind::ActorCritic),
            _ => Err(format!("unknown learner `{s}` (expected tabular or actor-critic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    /// Tabular learning rate.
    pub tabular_alpha: f64,
    /// Tabular discount.
    pub tabular_gamma: f64,
    pub actor_critic: ActorCriticConfig,
    pub memory_capacity: usize,
    pub batch_size: usize,
    /// Slots per episode; one replay cycle runs at each episode end.
    pub episode_size: u64,
    pub epsilon: EpsilonSchedule,
    pub caps: ObservationCaps,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            kind: LearnerKind::ActorCritic,
            tabular_alpha: 0.1,
            tabular_gamma: 0.9,
            actor_critic: ActorCriticConfig::default(),
            memory_capacity: 10_000,
            batch_size: 2,
            episode_size: 8,
            epsilon: EpsilonSchedule::default(),
            caps: ObservationCaps::default(),
        }
    }
}

/// One node's learner. Both kinds see the same clamped observation.
#[derive(Debug, Clone)]
pub enum NodeLearner {
    Tabular {
        table: QTable<AgentObservation>,
        caps: ObservationCaps,
    },
    ActorCritic {
        params: Box<ActorCriticParams>,
        memory: ReplayMemory,
        caps: ObservationCaps,
        batch_size: usize,
        episode_size: u64,
        steps: u64,
        replay_rng: SimRng,
    },
}

impl NodeLearner {
    pub fn new(cfg: &LearnerConfig, init_rng: &mut SimRng, replay_rng: SimRng) -> Self {
        match cfg.kind {
            LearnerKind::Tabular => NodeLearner::Tabular {
                table: QTable::new(cfg.tabular_alpha, cfg.tabular_gamma),
                caps: cfg.caps,
            },
            LearnerKind::ActorCritic => NodeLearner::ActorCritic {
                params: Box::new(ActorCriticParams::new(cfg.caps.encoded_len(), &cfg.actor_critic, init_rng)),
                memory: ReplayMemory::new(cfg.memory_capacity),
                caps: cfg.caps,
                batch_size: cfg.batch_size,
                episode_size: cfg.episode_size.max(1),
                steps: 0,
                replay_rng,
            },
        }
    }

    /// Q-values the greedy choice maximizes: the table row, or the critic's
    /// output for the actor-critic.
    pub fn scores(&self, obs: &AgentObservation) -> Result<[f64; Action::COUNT]> {
        match self {
            NodeLearner::Tabular { table, caps } => Ok(table.values(&caps.clamp(obs))),
            NodeLearner::ActorCritic { params, caps, .. } => {
                let p = params.q_values(&one_hot_encode(obs, caps))?;
                let mut out = [0.0; Action::COUNT];
                out.copy_from_slice(&p);
                Ok(out)
            }
        }
    }

    /// Feeds one transition. The actor-critic stores it and runs a replay
    /// cycle at every episode boundary.
    pub fn learn(&mut self, s: &AgentObservation, a: Action, p: f64, s_next: &AgentObservation) -> Result<()> {
        match self {
            NodeLearner::Tabular { table, caps } => {
                table.q_update(&caps.clamp(s), a, p, &caps.clamp(s_next));
                Ok(())
            }
            NodeLearner::ActorCritic {
                params,
                memory,
                caps,
                batch_size,
                episode_size,
                steps,
                replay_rng,
            } => {
                memory.push(Experience {
                    state: one_hot_encode(s, caps),
                    action: a,
                    utility: p,
                    next_state: one_hot_encode(s_next, caps),
                });
                *steps += 1;
                if *steps % *episode_size == 0 {
                    replay_cycle(memory, *batch_size, params, replay_rng)?;
                }
                Ok(())
            }
        }
    }

    pub fn actor_critic(&self) -> Option<&ActorCriticParams> {
        match self {
            NodeLearner::ActorCritic { params, .. } => Some(params),
            NodeLearner::Tabular { .. } => None,
        }
    }
}
