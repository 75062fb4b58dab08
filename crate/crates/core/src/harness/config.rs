use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::UtilityWeights;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::MobilityState;
use crate::learning::LearnerConfig;
use crate::mac::MacParams;
use crate::routing::ProtocolKind;

/// How blue nodes pick their roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// Per-node learner (see [`LearnerConfig`]).
    Learned,
    /// Static jammer roles, everyone else follows the handshake.
    FixedRole,
    /// Every node waits every slot.
    AllWait,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Learned => "learned",
            PolicyKind::FixedRole => "fixed-role",
            PolicyKind::AllWait => "all-wait",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "learned" => Ok(PolicyKind::Learned),
            "fixed-role" => Ok(PolicyKind::FixedRole),
            "all-wait" => Ok(PolicyKind::AllWait),
            _ => Err(format!("unknown policy `{s}` (expected learned, fixed-role or all-wait)")),
        }
    }
}

/// Shares of blue nodes permanently assigned to jamming under the
/// fixed-role policy. Flow endpoints are never drafted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedRoles {
    pub cooperative_jammers: f64,
    pub adversarial_jammers: f64,
}

impl Default for FixedRoles {
    fn default() -> Self {
        Self {
            cooperative_jammers: 0.1,
            adversarial_jammers: 0.1,
        }
    }
}

/// Everything a run depends on. Loaded from TOML; every field is optional
/// and falls back to the desk profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_blue: usize,
    pub red_eavesdroppers: usize,
    pub red_jammers: usize,
    pub red_transmitters: usize,
    /// Network radius, meters.
    pub radius: f64,
    pub n_flows: usize,
    /// Per-slot probability that a source injects a packet.
    pub arrival_prob: f64,
    /// Communication range r, meters.
    pub comm_range: f64,
    pub mobility: MobilityState,
    /// Derived from `comm_range` when absent.
    pub channel: Option<ChannelParams>,
    pub mac: MacParams,
    pub protocol: ProtocolKind,
    pub policy: PolicyKind,
    pub fixed_roles: FixedRoles,
    pub weights: UtilityWeights,
    pub learner: LearnerConfig,
    /// Horizon T in slots.
    pub slots: u64,
    /// First slot at which red forces act.
    pub activation_slot: u64,
    pub repetitions: usize,
    /// Repetition k runs with `seed + k`.
    pub seed: u64,
    /// Two-sided confidence level of the aggregate bands.
    pub confidence_level: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    /// Small profile for quick local runs.
    pub fn desk() -> Self {
        Self {
            n_blue: 20,
            red_eavesdroppers: 3,
            red_jammers: 3,
            red_transmitters: 4,
            radius: 10_000.0,
            n_flows: 5,
            arrival_prob: 0.5,
            comm_range: 5_000.0,
            mobility: MobilityState::default(),
            channel: None,
            mac: MacParams::default(),
            protocol: ProtocolKind::JammingAware,
            policy: PolicyKind::Learned,
            fixed_roles: FixedRoles::default(),
            weights: UtilityWeights::THROUGHPUT_FIRST,
            learner: LearnerConfig::default(),
            slots: 3_000,
            activation_slot: 1_000,
            repetitions: 10,
            seed: 1,
            confidence_level: 0.99,
        }
    }

    /// 40 blue nodes, 3/3/4 red, 15,000 slots, 30 repetitions, red forces
    /// from slot 5,000.
    pub fn full() -> Self {
        Self {
            n_blue: 40,
            slots: 15_000,
            activation_slot: 5_000,
            repetitions: 30,
            ..Self::desk()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full()),
            _ => Err(Error::Config(format!("unknown profile `{name}` (expected desk or full)"))),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Channel parameters, derived from the communication range if not set.
    pub fn channel_params(&self) -> ChannelParams {
        self.channel.unwrap_or_else(|| ChannelParams::for_range(self.comm_range))
    }

    /// Copy with every derived field filled in.
    pub fn resolved(&self) -> Self {
        Self {
            channel: Some(self.channel_params()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.slots < 1 {
            return fail("slots must be at least 1".into());
        }
        if self.repetitions < 1 {
            return fail("repetitions must be at least 1".into());
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return fail(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.comm_range > 0.0) || !self.comm_range.is_finite() {
            return fail(format!("comm_range must be positive, got {}", self.comm_range));
        }
        if self.n_flows > self.n_blue / 2 {
            return fail(format!("{} flows need {} blue nodes", self.n_flows, 2 * self.n_flows));
        }
        if !(0.0..=1.0).contains(&self.arrival_prob) {
            return fail(format!("arrival_prob must lie in [0, 1], got {}", self.arrival_prob));
        }
        if !(self.mobility.speed >= 0.0) || !(self.mobility.slot_duration > 0.0) {
            return fail("mobility needs speed >= 0 and slot_duration > 0".into());
        }
        let FixedRoles {
            cooperative_jammers: cj,
            adversarial_jammers: aj,
        } = self.fixed_roles;
        if !(cj >= 0.0 && aj >= 0.0 && cj + aj <= 1.0) {
            return fail("fixed role shares must be non-negative and sum to at most 1".into());
        }
        if !self.weights.is_valid() {
            return fail("utility weights must be finite and non-negative".into());
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return fail(format!("confidence_level must lie in (0, 1), got {}", self.confidence_level));
        }
        let l = &self.learner;
        if l.batch_size == 0 || l.memory_capacity == 0 || l.episode_size == 0 {
            return fail("learner batch_size, memory_capacity and episode_size must be positive".into());
        }
        if l.epsilon.steps.iter().any(|(_, e)| !(0.0..=1.0).contains(e)) {
            return fail("epsilon values must lie in [0, 1]".into());
        }
        if l.epsilon.steps.windows(2).any(|w| w[0].0 >= w[1].0) {
            return fail("epsilon breakpoints must be strictly increasing".into());
        }
        self.channel_params().validate()
    }
}
