//! Simplified CSMA/CA: a one-message-per-slot RTS/CTS/DATA/ACK handshake
//! and the ten-field observation each node exposes to its policy.
//!
//! A slot has two halves. In the emission half every node turns its chosen
//! [`Action`] into at most one radiated signal ([`Emission`]). The simulator
//! then resolves which messages each silent node decodes, and in the
//! absorption half every node folds what it heard into its observation.
//! Nodes that radiate in a slot hear nothing in that slot.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::Action;

pub type NodeId = usize;
pub type FlowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    Rts,
    Cts,
    Data,
    Ack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MacMessage {
    pub kind: MessageKind,
    pub from: NodeId,
    pub to: NodeId,
    pub flow: FlowId,
}

/// What a node radiates in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emission {
    Silent,
    Message(MacMessage),
    CooperativeJam,
    AdversarialJam,
}

impl Emission {
    pub fn is_silent(&self) -> bool {
        matches!(self, Emission::Silent)
    }

    pub fn message(&self) -> Option<&MacMessage> {
        match self {
            Emission::Message(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_jamming(&self) -> bool {
        matches!(self, Emission::CooperativeJam | Emission::AdversarialJam)
    }
}

/// Per-node state vector, fields in observation order s1..s10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AgentObservation {
    pub q_len: u32,
    pub rts_for_me: bool,
    pub rts_other: bool,
    pub cts_for_me: bool,
    pub cts_other: bool,
    pub sent_rts: bool,
    pub sent_cts: bool,
    pub slots_since_rts: u32,
    pub backoff_elapsed: u32,
    pub waiting_for_data: u32,
}

/// Saturation caps for the counted observation fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservationCaps {
    pub q_len: u32,
    pub slots_since_rts: u32,
    pub backoff_elapsed: u32,
    pub waiting_for_data: u32,
}

impl Default for ObservationCaps {
    fn default() -> Self {
        Self {
            q_len: 8,
            slots_since_rts: 4,
            backoff_elapsed: 4,
            waiting_for_data: 4,
        }
    }
}

impl ObservationCaps {
    pub fn encoded_len(&self) -> usize {
        (self.q_len + 1) as usize
            + 6 * 2
            + (self.slots_since_rts + 1) as usize
            + (self.backoff_elapsed + 1) as usize
            + (self.waiting_for_data + 1) as usize
    }

    /// The observation with every counter clamped to its cap. Two
    /// observations encode identically iff their clamped forms are equal.
    pub fn clamp(&self, obs: &AgentObservation) -> AgentObservation {
        AgentObservation {
            q_len: obs.q_len.min(self.q_len),
            slots_since_rts: obs.slots_since_rts.min(self.slots_since_rts),
            backoff_elapsed: obs.backoff_elapsed.min(self.backoff_elapsed),
            waiting_for_data: obs.waiting_for_data.min(self.waiting_for_data),
            ..*obs
        }
    }
}

/// One-hot encoding: each counter becomes a block of `cap + 1` entries and
/// each indicator a block of two, concatenated in field order.
pub fn one_hot_encode(obs: &AgentObservation, caps: &ObservationCaps) -> Vec<f64> {
    let mut out = vec![0.0; caps.encoded_len()];
    let mut offset = 0;
    let mut put = |value: u32, cap: u32| {
        out[offset + value.min(cap) as usize] = 1.0;
        offset += cap as usize + 1;
    };
    put(obs.q_len, caps.q_len);
    for flag in [
        obs.rts_for_me,
        obs.rts_other,
        obs.cts_for_me,
        obs.cts_other,
        obs.sent_rts,
        obs.sent_cts,
    ] {
        put(flag as u32, 1);
    }
    put(obs.slots_since_rts, caps.slots_since_rts);
    put(obs.backoff_elapsed, caps.backoff_elapsed);
    put(obs.waiting_for_data, caps.waiting_for_data);
    out
}

/// True iff some inbound CTS is addressed to another node.
pub fn detect_collision(node: NodeId, inbound: &[MacMessage]) -> bool {
    inbound
        .iter()
        .any(|m| m.kind == MessageKind::Cts && m.to != node)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacParams {
    /// Backoff is drawn uniformly from 1..=backoff_window slots.
    pub backoff_window: u32,
    /// A handshake older than this many slots without a CTS is abandoned.
    pub rts_expiry: u32,
    /// An unanswered RTS is repeated after a uniform 2..=rts_retry_window
    /// slots.
    pub rts_retry_window: u32,
    /// A granted CTS older than this many slots without DATA is abandoned.
    pub data_wait_expiry: u32,
}

impl Default for MacParams {
    fn default() -> Self {
        Self {
            backoff_window: 8,
            rts_expiry: 10,
            rts_retry_window: 4,
            data_wait_expiry: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Route {
    pub flow: FlowId,
    pub next_hop: NodeId,
}

/// Events the simulator acts on after absorption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacEvent {
    /// A DATA frame addressed to this node was decoded.
    DataReceived { from: NodeId, flow: FlowId },
}

/// Handshake state of one node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MacNode {
    pub obs: AgentObservation,
    /// Sender side: handshake started, waiting for a CTS.
    pending: Option<Route>,
    started_this_slot: bool,
    /// CTS for the pending handshake heard last slot.
    cts_grant: bool,
    /// RTS frames addressed to this node heard last slot.
    rts_inbox: Vec<(NodeId, FlowId)>,
    /// Receiver side: CTS granted, waiting for DATA.
    serving: Option<(NodeId, FlowId)>,
    granted_this_slot: bool,
    backoff_remaining: u32,
    ack_due: Option<(NodeId, FlowId)>,
    /// Value of the RTS counter at which an unanswered RTS is repeated.
    retry_at: u32,
    overheard_rts_sender: Option<NodeId>,
}

impl MacNode {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pending(&self) -> Option<Route> {
        self.pending
    }

    pub fn serving(&self) -> Option<(NodeId, FlowId)> {
        self.serving
    }

    pub fn in_backoff(&self) -> bool {
        self.backoff_remaining > 0
    }

    /// Sender of the RTS overheard (addressed elsewhere) in the last slot.
    pub fn overheard_rts_sender(&self) -> Option<NodeId> {
        self.overheard_rts_sender
    }

    /// True when the node is the receiving end of a handshake, either with a
    /// fresh RTS to answer or a granted CTS awaiting DATA.
    pub fn engaged_as_receiver(&self) -> bool {
        !self.rts_inbox.is_empty() || self.serving.is_some()
    }

    /// True when a Transmit action would radiate DATA this slot.
    pub fn holds_cts(&self) -> bool {
        self.cts_grant && self.pending.is_some() && self.backoff_remaining == 0
    }

    /// Emission half of the slot. `route` is the routing layer's current
    /// choice for a new handshake; `None` means nothing routable is queued.
    pub fn emit(&mut self, id: NodeId, action: Action, route: Option<Route>) -> Emission {
        self.started_this_slot = false;
        self.granted_this_slot = false;
        match action {
            Action::CooperativeJam => Emission::CooperativeJam,
            Action::AdversarialJam => Emission::AdversarialJam,
            Action::Transmit => {
                if self.backoff_remaining > 0 {
                    return Emission::Silent;
                }
                // Carrier sense: a handshake overheard last slot defers any RTS.
                let busy = self.obs.rts_other || self.obs.cts_other;
                match self.pending {
                    Some(p) if self.cts_grant => {
                        self.pending = None;
                        self.cts_grant = false;
                        Emission::Message(MacMessage {
                            kind: MessageKind::Data,
                            from: id,
                            to: p.next_hop,
                            flow: p.flow,
                        })
                    }
                    Some(p) => {
                        if !busy && self.obs.slots_since_rts + 1 >= self.retry_at {
                            Emission::Message(MacMessage {
                                kind: MessageKind::Rts,
                                from: id,
                                to: p.next_hop,
                                flow: p.flow,
                            })
                        } else {
                            Emission::Silent
                        }
                    }
                    None => match route {
                        Some(r) if r.next_hop != id && !busy => {
                            self.pending = Some(r);
                            self.started_this_slot = true;
                            Emission::Message(MacMessage {
                                kind: MessageKind::Rts,
                                from: id,
                                to: r.next_hop,
                                flow: r.flow,
                            })
                        }
                        _ => Emission::Silent,
                    },
                }
            }
            Action::Receive => {
                // Grant the smallest requesting id.
                if let Some(&(from, flow)) = self.rts_inbox.iter().min_by_key(|(from, _)| *from) {
                    self.serving = Some((from, flow));
                    self.granted_this_slot = true;
                    Emission::Message(MacMessage {
                        kind: MessageKind::Cts,
                        from: id,
                        to: from,
                        flow,
                    })
                } else {
                    self.take_ack(id)
                }
            }
            Action::Wait => self.take_ack(id),
        }
    }

    fn take_ack(&mut self, id: NodeId) -> Emission {
        match self.ack_due.take() {
            Some((to, flow)) => Emission::Message(MacMessage {
                kind: MessageKind::Ack,
                from: id,
                to,
                flow,
            }),
            None => Emission::Silent,
        }
    }

    /// Absorption half of the slot. `heard` are the frames this node decoded;
    /// they are ignored if the node radiated. Returns DATA deliveries.
    pub fn absorb<R: Rng + ?Sized>(
        &mut self,
        id: NodeId,
        emitted: &Emission,
        heard: &[MacMessage],
        q_len: u32,
        params: &MacParams,
        rng: &mut R,
    ) -> Vec<MacEvent> {
        let heard: &[MacMessage] = if emitted.is_silent() { heard } else { &[] };
        let mut events = Vec::new();

        self.rts_inbox.clear();
        self.cts_grant = false;
        self.overheard_rts_sender = None;
        // An ACK owed from an earlier slot lapses if not sent by now.
        if !matches!(emitted, Emission::Message(MacMessage { kind: MessageKind::Ack, .. })) {
            self.ack_due = None;
        }

        let mut obs = AgentObservation {
            q_len,
            sent_rts: matches!(emitted.message(), Some(m) if m.kind == MessageKind::Rts),
            sent_cts: matches!(emitted.message(), Some(m) if m.kind == MessageKind::Cts),
            ..AgentObservation::default()
        };

        for m in heard {
            match m.kind {
                MessageKind::Rts if m.to == id => {
                    obs.rts_for_me = true;
                    self.rts_inbox.push((m.from, m.flow));
                }
                MessageKind::Rts => {
                    obs.rts_other = true;
                    self.overheard_rts_sender = Some(m.from);
                }
                MessageKind::Cts if m.to == id => {
                    if matches!(self.pending, Some(p) if p.next_hop == m.from && p.flow == m.flow) {
                        obs.cts_for_me = true;
                        self.cts_grant = true;
                    }
                }
                MessageKind::Cts => obs.cts_other = true,
                MessageKind::Data if m.to == id => {
                    if matches!(self.serving, Some((from, _)) if from == m.from) {
                        self.serving = None;
                    }
                    self.ack_due = Some((m.from, m.flow));
                    events.push(MacEvent::DataReceived {
                        from: m.from,
                        flow: m.flow,
                    });
                }
                MessageKind::Data | MessageKind::Ack => {}
            }
        }

        // Backoff countdown, then a fresh draw on a detected collision.
        if self.backoff_remaining > 0 {
            self.backoff_remaining -= 1;
            obs.backoff_elapsed = if self.backoff_remaining > 0 {
                self.obs.backoff_elapsed + 1
            } else {
                0
            };
        }
        if detect_collision(id, heard) && self.pending.is_some() && self.backoff_remaining == 0 {
            self.backoff_remaining = rng.random_range(1..=params.backoff_window.max(1));
            obs.backoff_elapsed = 0;
        }

        if self.pending.is_some() {
            obs.slots_since_rts = if self.started_this_slot {
                0
            } else {
                self.obs.slots_since_rts + 1
            };
            if obs.sent_rts {
                self.retry_at = obs.slots_since_rts + rng.random_range(2..=params.rts_retry_window.max(2));
            }
            if obs.slots_since_rts > params.rts_expiry {
                self.pending = None;
                self.cts_grant = false;
                obs.cts_for_me = false;
                obs.slots_since_rts = 0;
            }
        }

        if self.serving.is_some() {
            obs.waiting_for_data = if self.granted_this_slot {
                0
            } else {
                self.obs.waiting_for_data + 1
            };
            if obs.waiting_for_data > params.data_wait_expiry {
                self.serving = None;
                obs.waiting_for_data = 0;
            }
        }

        self.obs = obs;
        events
    }
}

/// Both halves of a slot for one node, for callers that already know which
/// frames the node decodes. Returns the new observation and the outbound
/// frame, if any.
pub fn mac_transition<R: Rng + ?Sized>(
    node: &mut MacNode,
    id: NodeId,
    action: Action,
    route: Option<Route>,
    inbound: &[MacMessage],
    q_len: u32,
    params: &MacParams,
    rng: &mut R,
) -> (AgentObservation, Vec<MacMessage>) {
    let emission = node.emit(id, action, route);
    node.absorb(id, &emission, inbound, q_len, params, rng);
    (node.obs, emission.message().copied().into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub id: u64,
    pub flow: FlowId,
    pub born: u64,
}

/// Per-flow FIFO queues held by one node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeQueues {
    queues: Vec<VecDeque<Packet>>,
}

impl NodeQueues {
    pub fn new(n_flows: usize) -> Self {
        Self {
            queues: vec![VecDeque::new(); n_flows],
        }
    }

    pub fn len(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }

    pub fn flow_len(&self, flow: FlowId) -> usize {
        self.queues[flow].len()
    }

    pub fn non_empty_flows(&self) -> impl Iterator<Item = FlowId> + '_ {
        self.queues
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.is_empty())
            .map(|(f, _)| f)
    }

    pub fn push(&mut self, packet: Packet) {
        self.queues[packet.flow].push_back(packet);
    }

    pub fn pop(&mut self, flow: FlowId) -> Option<Packet> {
        self.queues[flow].pop_front()
    }
}
