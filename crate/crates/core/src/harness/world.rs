use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    self, utility_adversarial_jam, utility_cooperative_jam, utility_receive, utility_transmit, Action,
    MetricComponents, RedForceState, SlotUtility,
};
use crate::channel::{db_to_linear, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::{self, NetworkLayout, Position};
use crate::learning::{select_action, NodeLearner};
use crate::mac::{AgentObservation, Emission, MacEvent, MacMessage, MacNode, MessageKind, NodeQueues, Packet};
use crate::rng::{self, SimRng, Stream};
use crate::routing::RoutingPlane;

use super::config::{ExperimentConfig, PolicyKind};

/// Shadowing keys for red nodes start here so they never collide with blue ids.
const RED_KEY_BASE: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Communicator,
    CooperativeJammer,
    AdversarialJammer,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowLedger {
    pub injected: u64,
    pub delivered: u64,
}

/// Everything observable about one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: u64,
    /// Raw per-slot inputs of the network utility.
    pub components: MetricComponents,
    pub eaves_attempts: u32,
    pub eaves_failed: u32,
    pub red_active: u32,
    pub red_jammed: u32,
    /// Blue nodes that considered themselves jammed.
    pub blue_jammed: u32,
    pub injected: u32,
    /// Counts per action, in `Action::ALL` order.
    pub action_counts: [u32; Action::COUNT],
    /// Frames radiated per kind (RTS, CTS, DATA, ACK).
    pub frames_sent: [u32; 4],
    /// Frames decoded by their addressee, per kind.
    pub frames_decoded: [u32; 4],
    /// Sum of per-node utilities.
    pub node_utility: f64,
}

/// One node radiating on the blue band in a slot. Adversarial jamming and
/// red traffic use the red band and never enter blue SINR.
#[derive(Debug, Clone, Copy)]
struct Radiator {
    key: u64,
    position: Position,
    /// The frame carried, if any (jamming carries none).
    message: Option<MacMessage>,
}

/// Full simulation state of one repetition.
#[derive(Debug, Clone)]
pub struct World {
    cfg: ExperimentConfig,
    channel: ChannelParams,
    seed: u64,
    slot: u64,
    layout: NetworkLayout,
    positions: Vec<Position>,
    reds: Vec<RedForceState>,
    routing: RoutingPlane,
    macs: Vec<MacNode>,
    queues: Vec<NodeQueues>,
    roles: Vec<Role>,
    relay_ok: Vec<bool>,
    learners: Vec<NodeLearner>,
    policy_rngs: Vec<SimRng>,
    mobility_rng: SimRng,
    traffic_rng: SimRng,
    backoff_rng: SimRng,
    jammed: Vec<bool>,
    last_actions: Vec<Action>,
    ledgers: Vec<FlowLedger>,
    next_packet: u64,
}

impl World {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let cfg = cfg.resolved();
        let layout = geometry::deploy_network(
            cfg.n_blue,
            cfg.red_eavesdroppers,
            cfg.red_jammers,
            cfg.red_transmitters,
            cfg.radius,
            cfg.n_flows,
            seed,
        )?;
        Self::with_layout(&cfg, seed, layout)
    }

    /// Builds a world on a given layout (used for scripted scenarios).
    pub fn with_layout(cfg: &ExperimentConfig, seed: u64, layout: NetworkLayout) -> Result<Self> {
        cfg.validate()?;
        let cfg = cfg.resolved();
        let n = layout.n_blue();
        for f in &layout.flows {
            if f.source >= n || f.destination >= n || f.source == f.destination {
                return Err(Error::Config(format!("flow {}->{} is invalid for {n} nodes", f.source, f.destination)));
            }
        }
        let channel = cfg.channel_params();
        let reds = agents::red_forces(&layout, cfg.activation_slot);
        let positions = layout.blue_nodes.clone();
        let routing = RoutingPlane::new(cfg.protocol, cfg.comm_range, layout.flows.clone(), &positions);
        let roles = if cfg.policy == PolicyKind::FixedRole {
            assign_roles(&cfg, &layout, seed)
        } else {
            vec![Role::Communicator; n]
        };
        let relay_ok = roles.iter().map(|r| *r == Role::Communicator).collect();
        let learners = if cfg.policy == PolicyKind::Learned {
            (0..n)
                .map(|i| {
                    let mut init = rng::stream(seed, Stream::WeightInit(i));
                    NodeLearner::new(&cfg.learner, &mut init, rng::stream(seed, Stream::Replay(i)))
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            channel,
            seed,
            slot: 0,
            positions,
            reds,
            routing,
            macs: vec![MacNode::new(); n],
            queues: vec![NodeQueues::new(layout.flows.len()); n],
            roles,
            relay_ok,
            learners,
            policy_rngs: (0..n).map(|i| rng::stream(seed, Stream::Policy(i))).collect(),
            mobility_rng: rng::stream(seed, Stream::Mobility),
            traffic_rng: rng::stream(seed, Stream::Traffic),
            backoff_rng: rng::stream(seed, Stream::Backoff),
            jammed: vec![false; n],
            last_actions: vec![Action::Wait; n],
            ledgers: vec![FlowLedger::default(); layout.flows.len()],
            next_packet: 0,
            layout,
            cfg,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of the next slot to run.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn layout(&self) -> &NetworkLayout {
        &self.layout
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn jammed(&self) -> &[bool] {
        &self.jammed
    }

    pub fn routing(&self) -> &RoutingPlane {
        &self.routing
    }

    pub fn queues(&self) -> &[NodeQueues] {
        &self.queues
    }

    pub fn ledgers(&self) -> &[FlowLedger] {
        &self.ledgers
    }

    pub fn macs(&self) -> &[MacNode] {
        &self.macs
    }

    pub fn learners(&self) -> &[NodeLearner] {
        &self.learners
    }

    /// Actions broadcast in the last slot.
    pub fn last_actions(&self) -> &[Action] {
        &self.last_actions
    }

    /// Per flow: injected = delivered + still queued somewhere.
    pub fn conservation_holds(&self) -> bool {
        self.ledgers.iter().enumerate().all(|(f, l)| {
            let queued: usize = self.queues.iter().map(|q| q.flow_len(f)).sum();
            l.injected == l.delivered + queued as u64
        })
    }

    pub fn run_slot(&mut self) -> Result<SlotRecord> {
        self.step(None)
    }

    /// Runs one slot with the given actions instead of the policy. Learners,
    /// if any, still update on the outcome.
    pub fn run_slot_with(&mut self, actions: &[Action]) -> Result<SlotRecord> {
        if actions.len() != self.positions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.positions.len(),
                got: actions.len(),
            });
        }
        self.step(Some(actions))
    }

    fn step(&mut self, forced: Option<&[Action]>) -> Result<SlotRecord> {
        let t = self.slot;
        let n = self.positions.len();
        let radius = self.cfg.radius;
        let range = self.cfg.comm_range;

        // (1) Mobility and source arrivals.
        for p in self.positions.iter_mut() {
            *p = geometry::brownian_step(*p, &self.cfg.mobility, radius, &mut self.mobility_rng);
        }
        let mut injected = 0;
        for (f, flow) in self.layout.flows.iter().enumerate() {
            if self.traffic_rng.random_bool(self.cfg.arrival_prob) {
                self.queues[flow.source].push(Packet {
                    id: self.next_packet,
                    flow: f,
                    born: t,
                });
                self.next_packet += 1;
                self.ledgers[f].injected += 1;
                injected += 1;
            }
        }

        // (2) Jam sensing against red jammers, then one routing round.
        let red_events = agents::red_force_step(&self.reds, t);
        for (i, p) in self.positions.iter().enumerate() {
            let power: f64 = red_events
                .jammers
                .iter()
                .map(|(_, jp)| self.channel.mean_received_power(p.distance(jp).max(1.0)))
                .sum();
            self.jammed[i] = power > self.channel.jam_detect_threshold;
        }
        self.routing.round(&self.positions, &self.jammed, &self.relay_ok);

        // (3) Observation and action selection.
        let observed: Vec<AgentObservation> = (0..n)
            .map(|i| AgentObservation {
                q_len: self.queues[i].len() as u32,
                ..self.macs[i].obs
            })
            .collect();
        let engaged: Vec<bool> = self.macs.iter().map(|m| m.engaged_as_receiver()).collect();
        let overheard: Vec<Option<usize>> = self.macs.iter().map(|m| m.overheard_rts_sender()).collect();
        let actions: Vec<Action> = match forced {
            Some(a) => a.to_vec(),
            None => self.choose_actions(&observed)?,
        };

        // (4) Emissions and channel resolution.
        let emissions: Vec<Emission> = (0..n)
            .map(|i| {
                let route = self.routing.route_for(i, &self.queues[i]);
                self.macs[i].emit(i, actions[i], route)
            })
            .collect();
        let mut radiators: Vec<Radiator> = emissions
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_silent() && !matches!(e, Emission::AdversarialJam))
            .map(|(i, e)| Radiator {
                key: i as u64,
                position: self.positions[i],
                message: e.message().copied(),
            })
            .collect();
        let n_blue_radiators = radiators.len();
        for (k, p) in &red_events.jammers {
            radiators.push(Radiator {
                key: RED_KEY_BASE + *k as u64,
                position: *p,
                message: None,
            });
        }

        let tau = self.channel.sinr_threshold_linear();
        let mut heard: Vec<Vec<MacMessage>> = vec![Vec::new(); n];
        let mut powers = vec![0.0; radiators.len()];
        for k in 0..n {
            if !emissions[k].is_silent() {
                continue;
            }
            self.fill_powers(&radiators, self.positions[k], k as u64, t, &mut powers);
            let total: f64 = powers.iter().sum();
            for (r, rad) in radiators.iter().enumerate() {
                if let Some(m) = rad.message {
                    if powers[r] / (total - powers[r] + self.channel.noise_power) > tau {
                        heard[k].push(m);
                    }
                }
            }
        }

        let mut deliveries: Vec<(usize, usize, usize)> = Vec::new();
        for k in 0..n {
            let q = self.queues[k].len() as u32;
            let events = self.macs[k].absorb(k, &emissions[k], &heard[k], q, &self.cfg.mac, &mut self.backoff_rng);
            for ev in events {
                let MacEvent::DataReceived { from, flow } = ev;
                deliveries.push((from, k, flow));
            }
        }
        // A radiated frame succeeds when its addressee decodes it: RTS and
        // DATA count for the sender's Transmit, CTS for the Receive side.
        let mut tx_success = vec![false; n];
        let mut rx_success = vec![false; n];
        let mut frames_sent = [0u32; 4];
        let mut frames_decoded = [0u32; 4];
        for m in emissions.iter().filter_map(Emission::message) {
            frames_sent[m.kind as usize] += 1;
        }
        for (k, frames) in heard.iter().enumerate() {
            for m in frames.iter().filter(|m| m.to == k) {
                frames_decoded[m.kind as usize] += 1;
                match m.kind {
                    MessageKind::Rts | MessageKind::Data => tx_success[m.from] = true,
                    MessageKind::Cts => rx_success[m.from] = true,
                    MessageKind::Ack => {}
                }
            }
        }
        let mut delivered = 0u32;
        for (from, to, flow) in deliveries {
            let Some(packet) = self.queues[from].pop(flow) else {
                continue;
            };
            rx_success[to] = true;
            if self.layout.flows[flow].destination == to {
                self.ledgers[flow].delivered += 1;
                delivered += 1;
            } else {
                self.queues[to].push(packet);
            }
        }
        for k in 0..n {
            self.macs[k].obs.q_len = self.queues[k].len() as u32;
        }

        // (5) Red-force outcomes.
        let mut eaves_attempts = 0u32;
        let mut eaves_failed = 0u32;
        let blue_rads = &radiators[..n_blue_radiators];
        let mut blue_powers = vec![0.0; n_blue_radiators];
        for (e, ep) in &red_events.eavesdroppers {
            self.fill_powers(blue_rads, *ep, RED_KEY_BASE + *e as u64, t, &mut blue_powers);
            let total: f64 = blue_powers.iter().sum();
            for (r, rad) in blue_rads.iter().enumerate() {
                if !matches!(rad.message, Some(m) if m.kind == MessageKind::Data) {
                    continue;
                }
                let signal = blue_powers[r];
                if let Some(failed) =
                    agents::eavesdrop_attempt(*ep, rad.position, range, signal, total - signal, &self.channel)
                {
                    eaves_attempts += 1;
                    eaves_failed += u32::from(failed);
                }
            }
        }
        let red_active = red_events.active_count() as u32;
        let mut red_jammed = 0u32;
        for red in self.reds.iter().filter(|r| r.active(t)) {
            let aj: f64 = emissions
                .iter()
                .zip(&self.positions)
                .filter(|(e, _)| matches!(e, Emission::AdversarialJam))
                .map(|(_, p)| self.channel.mean_received_power(p.distance(&red.position).max(1.0)))
                .sum();
            if aj > self.channel.jam_detect_threshold {
                red_jammed += 1;
            }
        }

        // (6) Utilities and learning.
        let w = self.cfg.weights;
        let jam_range = self.channel.jam_range();
        let mut node_utility = 0.0;
        let mut action_counts = [0u32; Action::COUNT];
        let mut energy = 0.0;
        let mut delay = 0.0;
        for i in 0..n {
            let s = &observed[i];
            let q_positive = s.q_len > 0;
            let a = actions[i];
            action_counts[a.index()] += 1;
            if matches!(a, Action::Transmit | Action::CooperativeJam | Action::AdversarialJam) {
                energy += 1.0;
            }
            if q_positive && matches!(a, Action::Receive | Action::CooperativeJam | Action::AdversarialJam) {
                delay += 1.0;
            }
            let u = match a {
                Action::Transmit => utility_transmit(tx_success[i], s.cts_other, &w),
                Action::Receive => utility_receive(rx_success[i], s.rts_for_me || engaged[i], q_positive, &w),
                Action::CooperativeJam => {
                    let exposure = overheard[i].map_or(0.0, |sender| {
                        geometry::eavesdropper_exposure(self.positions[sender], range, self.positions[i], jam_range, radius)
                    });
                    utility_cooperative_jam(exposure, s.rts_other, q_positive, &w)
                }
                Action::AdversarialJam => {
                    let frac = geometry::adversarial_jam_fraction(self.positions[i], jam_range, radius);
                    let sensed = agents::sense_red_transmission(self.positions[i], &self.reds, t, &self.channel);
                    utility_adversarial_jam(frac, sensed, q_positive, &w)
                }
                Action::Wait => SlotUtility::ZERO,
            };
            node_utility += u.utility();
            if let Some(learner) = self.learners.get_mut(i) {
                learner.learn(s, a, u.utility(), &self.macs[i].obs)?;
            }
        }

        // (7) Metrics.
        let components = MetricComponents {
            delivered: delivered as f64,
            failed_eaves_frac: if eaves_attempts > 0 {
                eaves_failed as f64 / eaves_attempts as f64
            } else {
                0.0
            },
            jammed_red_frac: if red_active > 0 {
                red_jammed as f64 / red_active as f64
            } else {
                0.0
            },
            energy,
            delay,
        };

        // (8) Action broadcast.
        self.last_actions = actions;
        self.slot += 1;

        Ok(SlotRecord {
            slot: t,
            components,
            eaves_attempts,
            eaves_failed,
            red_active,
            red_jammed,
            blue_jammed: self.jammed.iter().filter(|j| **j).count() as u32,
            injected,
            action_counts,
            frames_sent,
            frames_decoded,
            node_utility,
        })
    }

    /// Shadowed power from every radiator at a listener.
    fn fill_powers(&self, radiators: &[Radiator], at: Position, listener_key: u64, t: u64, out: &mut [f64]) {
        let sigma = self.channel.shadowing_sigma_db;
        for (o, rad) in out.iter_mut().zip(radiators) {
            let d = rad.position.distance(&at).max(1.0);
            let shadow = if sigma > 0.0 {
                sigma * rng::keyed_normal(self.seed, t, rad.key, listener_key)
            } else {
                0.0
            };
            *o = self.channel.mean_received_power(d) * db_to_linear(shadow);
        }
    }

    fn choose_actions(&mut self, observed: &[AgentObservation]) -> Result<Vec<Action>> {
        let n = self.positions.len();
        match self.cfg.policy {
            PolicyKind::AllWait => Ok(vec![Action::Wait; n]),
            PolicyKind::FixedRole => Ok((0..n)
                .map(|i| match self.roles[i] {
                    Role::CooperativeJammer => Action::CooperativeJam,
                    Role::AdversarialJammer => Action::AdversarialJam,
                    Role::Communicator => {
                        if self.macs[i].engaged_as_receiver() {
                            Action::Receive
                        } else if !self.queues[i].is_empty() || self.macs[i].pending().is_some() {
                            Action::Transmit
                        } else {
                            Action::Wait
                        }
                    }
                })
                .collect()),
            PolicyKind::Learned => {
                let eps = self.cfg.learner.epsilon.epsilon(self.slot);
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let scores = self.learners[i].scores(&observed[i])?;
                    out.push(select_action(&scores, eps, &mut self.policy_rngs[i]));
                }
                Ok(out)
            }
        }
    }
}

/// Drafts permanent jammers from nodes that are not flow endpoints.
fn assign_roles(cfg: &ExperimentConfig, layout: &NetworkLayout, seed: u64) -> Vec<Role> {
    let n = layout.n_blue();
    let mut roles = vec![Role::Communicator; n];
    let mut pool: Vec<usize> = (0..n)
        .filter(|i| !layout.flows.iter().any(|f| f.source == *i || f.destination == *i))
        .collect();
    pool.shuffle(&mut rng::stream(seed, Stream::Roles));
    let n_cj = (cfg.fixed_roles.cooperative_jammers * n as f64).round() as usize;
    let n_aj = (cfg.fixed_roles.adversarial_jammers * n as f64).round() as usize;
    for (k, i) in pool.into_iter().take(n_cj + n_aj).enumerate() {
        roles[i] = if k < n_cj {
            Role::CooperativeJammer
        } else {
            Role::AdversarialJammer
        };
    }
    roles
}
