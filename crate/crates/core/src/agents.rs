//! Node roles, per-slot utilities, red-force behavior and the network
//! utility aggregate.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::geometry::{NetworkLayout, Position};

/// The five per-slot roles. Declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Transmit,
    Receive,
    CooperativeJam,
    AdversarialJam,
    Wait,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Transmit,
        Action::Receive,
        Action::CooperativeJam,
        Action::AdversarialJam,
        Action::Wait,
    ];
    pub const COUNT: usize = 5;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        Self::ALL[i]
    }

    /// Actions that radiate regardless of MAC state.
    pub fn is_jamming(self) -> bool {
        matches!(self, Action::CooperativeJam | Action::AdversarialJam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtilityWeights {
    pub w_t: f64,
    pub w_cj: f64,
    pub w_aj: f64,
    pub w_e: f64,
    pub w_d: f64,
}

impl UtilityWeights {
    /// Throughput-prioritized weights.
    pub const THROUGHPUT_FIRST: UtilityWeights = UtilityWeights {
        w_t: 15.0,
        w_cj: 5.0,
        w_aj: 3.0,
        w_e: 3.0,
        w_d: 1.0,
    };

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            w_t: self.w_t * k,
            w_cj: self.w_cj * k,
            w_aj: self.w_aj * k,
            w_e: self.w_e * k,
            w_d: self.w_d * k,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.w_t, self.w_cj, self.w_aj, self.w_e, self.w_d]
            .iter()
            .all(|w| *w >= 0.0 && w.is_finite())
    }
}

impl Default for UtilityWeights {
    fn default() -> Self {
        Self::THROUGHPUT_FIRST
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlotUtility {
    pub reward: f64,
    pub cost: f64,
}

impl SlotUtility {
    pub const ZERO: SlotUtility = SlotUtility {
        reward: 0.0,
        cost: 0.0,
    };

    pub fn utility(&self) -> f64 {
        self.reward - self.cost
    }
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn utility_transmit(sinr_ok: bool, collision: bool, w: &UtilityWeights) -> SlotUtility {
    SlotUtility {
        reward: ind(sinr_ok) * w.w_t * (1.0 - ind(collision)),
        cost: w.w_e,
    }
}

pub fn utility_receive(sinr_ok: bool, rts_for_me: bool, q_positive: bool, w: &UtilityWeights) -> SlotUtility {
    SlotUtility {
        reward: ind(sinr_ok) * w.w_t * ind(rts_for_me),
        cost: ind(q_positive) * w.w_d,
    }
}

pub fn utility_cooperative_jam(
    exposure: f64,
    overheard_rts_other: bool,
    q_positive: bool,
    w: &UtilityWeights,
) -> SlotUtility {
    SlotUtility {
        reward: exposure * w.w_cj * ind(overheard_rts_other),
        cost: w.w_e + ind(q_positive) * w.w_d,
    }
}

pub fn utility_adversarial_jam(
    jam_fraction: f64,
    sensed_red: bool,
    q_positive: bool,
    w: &UtilityWeights,
) -> SlotUtility {
    SlotUtility {
        reward: jam_fraction * w.w_aj * ind(sensed_red),
        cost: w.w_e + ind(q_positive) * w.w_d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RedBehavior {
    Eavesdrop,
    Jam,
    Transmit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedForceState {
    pub behavior: RedBehavior,
    pub position: Position,
    pub activation_slot: u64,
}

impl RedForceState {
    pub fn active(&self, slot: u64) -> bool {
        slot >= self.activation_slot
    }
}

/// Red-force nodes of a layout, in eavesdropper, jammer, transmitter order.
pub fn red_forces(layout: &NetworkLayout, activation_slot: u64) -> Vec<RedForceState> {
    let tag = |behavior: RedBehavior| {
        move |p: &Position| RedForceState {
            behavior,
            position: *p,
            activation_slot,
        }
    };
    layout
        .red_eavesdroppers
        .iter()
        .map(tag(RedBehavior::Eavesdrop))
        .chain(layout.red_jammers.iter().map(tag(RedBehavior::Jam)))
        .chain(layout.red_transmitters.iter().map(tag(RedBehavior::Transmit)))
        .collect()
}

/// Red-force activity in one slot. Jammers and transmitters radiate at the
/// common transmit power every active slot; eavesdroppers listen.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RedSlotEvents {
    pub jammers: Vec<(usize, Position)>,
    pub transmitters: Vec<(usize, Position)>,
    pub eavesdroppers: Vec<(usize, Position)>,
}

impl RedSlotEvents {
    pub fn is_empty(&self) -> bool {
        self.jammers.is_empty() && self.transmitters.is_empty() && self.eavesdroppers.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.jammers.len() + self.transmitters.len() + self.eavesdroppers.len()
    }
}

pub fn red_force_step(reds: &[RedForceState], slot: u64) -> RedSlotEvents {
    let mut ev = RedSlotEvents::default();
    for (k, red) in reds.iter().enumerate().filter(|(_, r)| r.active(slot)) {
        let entry = (k, red.position);
        match red.behavior {
            RedBehavior::Jam => ev.jammers.push(entry),
            RedBehavior::Transmit => ev.transmitters.push(entry),
            RedBehavior::Eavesdrop => ev.eavesdroppers.push(entry),
        }
    }
    ev
}

/// Indicator of sensed red-force traffic: unshadowed power received from
/// active red transmitters above the jam-detection threshold.
pub fn sense_red_transmission(node: Position, reds: &[RedForceState], slot: u64, channel: &ChannelParams) -> bool {
    let power: f64 = reds
        .iter()
        .filter(|r| r.behavior == RedBehavior::Transmit && r.active(slot))
        .map(|r| channel.mean_received_power(node.distance(&r.position).max(1.0)))
        .sum();
    power > channel.jam_detect_threshold
}

/// Outcome of one eavesdropper against one blue DATA frame, if the
/// eavesdropper lies inside the frame's reception disk. `Some(true)` is a
/// failed attempt (SINR at or below threshold).
pub fn eavesdrop_attempt(
    eavesdropper: Position,
    transmitter: Position,
    rx_range: f64,
    signal_w: f64,
    interference_w: f64,
    channel: &ChannelParams,
) -> Option<bool> {
    if eavesdropper.distance(&transmitter) > rx_range {
        return None;
    }
    let sinr_lin = signal_w / (interference_w + channel.noise_power);
    Some(sinr_lin <= channel.sinr_threshold_linear())
}

/// Per-slot network metric components, each as defined for the utility
/// aggregate: delivered packets, failed-eavesdrop proportion, jammed-red
/// proportion, energy units spent, and delay units incurred.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricComponents {
    pub delivered: f64,
    pub failed_eaves_frac: f64,
    pub jammed_red_frac: f64,
    pub energy: f64,
    pub delay: f64,
}

impl MetricComponents {
    pub fn weighted(&self, w: &UtilityWeights) -> f64 {
        w.w_t * self.delivered + w.w_cj * self.failed_eaves_frac + w.w_aj * self.jammed_red_frac
            - w.w_e * self.energy
            - w.w_d * self.delay
    }
}

/// Time-averaged rewards minus time-averaged costs over the logged horizon.
/// Returns 0 for an empty history.
pub fn network_utility(history: &[MetricComponents], w: &UtilityWeights) -> f64 {
    if history.is_empty() {
        return 0.0;
    }
    let sum = |f: fn(&MetricComponents) -> f64| history.iter().map(f).sum::<f64>();
    let total = w.w_t * sum(|m| m.delivered) + w.w_cj * sum(|m| m.failed_eaves_frac) + w.w_aj * sum(|m| m.jammed_red_frac)
        - w.w_e * sum(|m| m.energy)
        - w.w_d * sum(|m| m.delay);
    total / history.len() as f64
}
