//! Reference computations that share no code with the modules they check:
//! border point sampling, exhaustive next-hop scans, Dijkstra, central
//! finite differences, value iteration and goodness-of-fit tests. The test
//! suite uses them directly; [`run_all`] bundles a quick pass for the CLI.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::agents::Action;
use crate::geometry::{self, MobilityState, Position};
use crate::learning::{ActorCriticConfig, ActorCriticParams, QTable, ReplayMemory};
use crate::mac::NodeId;
use crate::routing::{self, FlowEntry, NeighborEntry, ProtocolKind, RoutingPlane, RoutingTable};

/// Border points `radius * e(phi_k)` on a uniform grid of `n` angles.
pub fn border_samples(n: usize, radius: f64) -> impl Iterator<Item = Position> {
    (0..n).map(move |k| {
        let phi = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        Position::new(radius * phi.cos(), radius * phi.sin())
    })
}

fn inside(p: Position, center: Position, range: f64) -> bool {
    let (dx, dy) = (p.x - center.x, p.y - center.y);
    dx * dx + dy * dy <= range * range
}

/// Sampled exposure: (points in both disks, points in the reception disk).
pub fn sampled_exposure_counts(
    tx: Position,
    rx_range: f64,
    cj: Position,
    cj_range: f64,
    radius: f64,
    n: usize,
) -> (usize, usize) {
    let mut both = 0;
    let mut rx = 0;
    for p in border_samples(n, radius) {
        if inside(p, tx, rx_range) {
            rx += 1;
            if inside(p, cj, cj_range) {
                both += 1;
            }
        }
    }
    (both, rx)
}

pub fn sampled_exposure(tx: Position, rx_range: f64, cj: Position, cj_range: f64, radius: f64, n: usize) -> f64 {
    match sampled_exposure_counts(tx, rx_range, cj, cj_range, radius, n) {
        (_, 0) => 0.0,
        (both, rx) => both as f64 / rx as f64,
    }
}

pub fn sampled_jam_fraction(jammer: Position, jam_range: f64, radius: f64, n: usize) -> f64 {
    border_samples(n, radius).filter(|p| inside(*p, jammer, jam_range)).count() as f64 / n as f64
}

/// Interior angle at `j` via atan2 of cross and dot products.
pub fn angle_atan2(j: Position, i: Position, jp: Position) -> f64 {
    let (ax, ay) = (i.x - j.x, i.y - j.y);
    let (bx, by) = (jp.x - j.x, jp.y - j.y);
    (ax * by - ay * bx).abs().atan2(ax * bx + ay * by)
}

/// One candidate relay as seen by the deciding node.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: NodeId,
    pub position: Position,
    pub dist_to_dest: f64,
    pub jammed: bool,
    /// The candidate's own next hop, if any.
    pub onward: Option<(NodeId, Position)>,
}

/// Exhaustive scan of every candidate's cost. Jamming-avoiding and
/// jamming-aware skip jammed candidates unless they are the destination.
pub fn exhaustive_next_hop(me: NodeId, at: Position, candidates: &[Candidate], protocol: ProtocolKind) -> Option<NodeId> {
    let costs: Vec<(NodeId, f64)> = candidates
        .iter()
        .map(|c| {
            let link = ((c.position.x - at.x).powi(2) + (c.position.y - at.y).powi(2)).sqrt();
            let excluded = protocol != ProtocolKind::MinDistance && c.jammed && c.dist_to_dest != 0.0;
            let cost = if excluded {
                f64::INFINITY
            } else if protocol == ProtocolKind::JammingAware {
                let theta = match c.onward {
                    None => PI,
                    Some((k, _)) if k == me => 0.0,
                    Some((_, p)) => angle_atan2(c.position, at, p),
                };
                if theta > 0.0 { link / theta + c.dist_to_dest } else { f64::INFINITY }
            } else {
                link + c.dist_to_dest
            };
            (c.id, cost)
        })
        .filter(|(_, cost)| cost.is_finite())
        .collect();
    let best = costs.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
    costs.iter().filter(|(_, c)| *c == best).map(|(id, _)| *id).min()
}

/// Routing table for node `me` with the given candidates as its neighbor
/// cache, on a single flow.
pub fn table_from_candidates(me: NodeId, at: Position, candidates: &[Candidate]) -> RoutingTable {
    RoutingTable {
        node: me,
        position: at,
        entries: vec![FlowEntry::UNREACHABLE],
        neighbors: candidates
            .iter()
            .map(|c| NeighborEntry {
                id: c.id,
                position: c.position,
                link: at.distance(&c.position),
                jammed: c.jammed,
                entries: vec![if c.jammed && c.dist_to_dest != 0.0 {
                    FlowEntry::UNREACHABLE
                } else {
                    FlowEntry {
                        next_hop: c.onward.map(|(k, _)| k),
                        dist: c.dist_to_dest,
                    }
                }],
                onward: vec![c.onward],
            })
            .collect(),
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Euclidean shortest-path distances to `dest` on the unit-disk graph of
/// radius `range`; infinity where unreachable.
pub fn dijkstra(positions: &[Position], range: f64, dest: usize) -> Vec<f64> {
    let n = positions.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[dest] = 0.0;
    heap.push(HeapItem(0.0, dest));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for v in 0..n {
            if v == u {
                continue;
            }
            let w = ((positions[u].x - positions[v].x).powi(2) + (positions[u].y - positions[v].y).powi(2)).sqrt();
            if w <= range && d + w < dist[v] {
                dist[v] = d + w;
                heap.push(HeapItem(d + w, v));
            }
        }
    }
    dist
}

/// Breadth-first reachability of `dest` on the unit-disk graph restricted
/// to nodes with `allowed[i]` (the destination is always allowed).
pub fn reachable(positions: &[Position], range: f64, allowed: &[bool], dest: usize) -> Vec<bool> {
    let n = positions.len();
    let mut seen = vec![false; n];
    seen[dest] = true;
    let mut q = VecDeque::from([dest]);
    while let Some(u) = q.pop_front() {
        if u != dest && !allowed[u] {
            continue;
        }
        for v in 0..n {
            if !seen[v] && v != u && positions[u].distance(&positions[v]) <= range {
                seen[v] = true;
                if allowed[v] {
                    q.push_back(v);
                }
            }
        }
    }
    seen
}

pub fn is_connected(positions: &[Position], range: f64) -> bool {
    positions.is_empty() || reachable(positions, range, &vec![true; positions.len()], 0).iter().all(|&r| r)
}

/// Central differences `(f(x + eps e_k) - f(x - eps e_k)) / (2 eps)`.
pub fn finite_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], eps: f64) -> Vec<f64> {
    let mut work = x.to_vec();
    (0..x.len())
        .map(|k| {
            work[k] = x[k] + eps;
            let up = f(&work);
            work[k] = x[k] - eps;
            let down = f(&work);
            work[k] = x[k];
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// `max_k |a_k - b_k| / max(max_k |a_k|, max_k |b_k|)`, 0 for two zero vectors.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Deterministic finite MDP for value iteration: `next[s][a]`, `reward[s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyMdp {
    pub next: Vec<Vec<usize>>,
    pub reward: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl ToyMdp {
    /// Two states, two actions: staying in state 0 pays 1, moving to state 1
    /// pays 0, state 1 pays 2 for returning and -1 for staying.
    pub fn two_by_two() -> Self {
        Self {
            next: vec![vec![0, 1], vec![1, 0]],
            reward: vec![vec![1.0, 0.0], vec![-1.0, 2.0]],
            gamma: 0.9,
        }
    }

    /// Bellman optimality iteration on Q until the max-norm change is below `tol`.
    pub fn value_iteration(&self, tol: f64) -> Vec<Vec<f64>> {
        let n_s = self.next.len();
        let mut q: Vec<Vec<f64>> = self.reward.iter().map(|r| vec![0.0; r.len()]).collect();
        loop {
            let v: Vec<f64> = q.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
            let mut delta = 0.0f64;
            for s in 0..n_s {
                for a in 0..q[s].len() {
                    let new = self.reward[s][a] + self.gamma * v[self.next[s][a]];
                    delta = delta.max((new - q[s][a]).abs());
                    q[s][a] = new;
                }
            }
            if delta < tol {
                return q;
            }
        }
    }

    /// Runs tabular `q_update` sweeps over every (s, a) pair. Action slots
    /// beyond the MDP's own are pinned far below any reachable value so the
    /// max ignores them.
    pub fn tabular_sweeps(&self, alpha: f64, sweeps: usize) -> QTable<usize> {
        let mut table = QTable::new(alpha, self.gamma);
        for (s, row) in self.reward.iter().enumerate() {
            for a in row.len()..Action::COUNT {
                table.set(s, Action::from_index(a), -1e12);
            }
        }
        for _ in 0..sweeps {
            for (s, row) in self.reward.iter().enumerate() {
                for (a, r) in row.iter().enumerate() {
                    table.q_update(&s, Action::from_index(a), *r, &self.next[s][a]);
                }
            }
        }
        table
    }
}

/// Upper-tail p-value of Pearson's chi-square statistic against equal
/// expected counts.
pub fn chi_square_uniform_pvalue(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let k = counts.len();
    if k < 2 || total == 0 {
        return 1.0;
    }
    let expected = total as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("k >= 2");
    1.0 - dist.cdf(stat)
}

/// Circular-symmetry check: p-value of a uniformity test on the bearings
/// of `points`, binned into `bins` equal sectors.
pub fn angular_uniformity_pvalue(points: &[Position], bins: usize) -> f64 {
    let mut counts = vec![0usize; bins];
    for p in points {
        let phi = p.y.atan2(p.x).rem_euclid(2.0 * PI);
        counts[((phi / (2.0 * PI) * bins as f64) as usize).min(bins - 1)] += 1;
    }
    chi_square_uniform_pvalue(&counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn report(name: &'static str, passed: bool, detail: String) -> OracleReport {
    OracleReport { name, passed, detail }
}

fn random_candidates(rng: &mut ChaCha8Rng, me: NodeId, at: Position, n: usize) -> Vec<Candidate> {
    let mut ids: Vec<NodeId> = (0..40).filter(|&k| k != me).collect();
    (0..n)
        .map(|slot| {
            let id = ids.swap_remove(rng.random_range(0..ids.len()));
            let position = Position::new(at.x + rng.random_range(-2500.0..2500.0), at.y + rng.random_range(-2500.0..2500.0));
            let dist_to_dest = if slot == 0 && rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..20_000.0f64).round()
            };
            let onward = match rng.random_range(0..4) {
                0 => None,
                1 => Some((me, at)),
                _ => Some((
                    100 + slot,
                    Position::new(position.x + rng.random_range(-2500.0..2500.0), position.y + rng.random_range(-2500.0..2500.0)),
                )),
            };
            Candidate {
                id,
                position,
                dist_to_dest,
                jammed: rng.random_bool(0.3),
                onward,
            }
        })
        .collect()
}

/// Next hop the library picks for the candidate table under `protocol`.
pub fn library_next_hop(table: &RoutingTable, protocol: ProtocolKind) -> Option<NodeId> {
    match protocol {
        ProtocolKind::JammingAware => routing::next_hop_jamming_aware(table, 0),
        _ => routing::next_hop_min_distance(table, 0),
    }
}

/// Candidates as the min-distance protocol sees them (jam flags ignored).
pub fn unjammed(candidates: &[Candidate]) -> Vec<Candidate> {
    candidates.iter().cloned().map(|c| Candidate { jammed: false, ..c }).collect()
}

/// Runs distance-vector rounds on a static topology until no entry changes,
/// up to `max_rounds`.
pub fn converge_distance_vector(positions: &[Position], range: f64, dest: usize, max_rounds: usize) -> Vec<f64> {
    let flows = vec![geometry::Flow {
        source: if dest == 0 { 1 } else { 0 },
        destination: dest,
    }];
    let mut plane = RoutingPlane::new(ProtocolKind::MinDistance, range, flows, positions);
    let none = vec![false; positions.len()];
    let all = vec![true; positions.len()];
    let mut last: Vec<f64> = Vec::new();
    for _ in 0..max_rounds {
        plane.round(positions, &none, &all);
        let now: Vec<f64> = plane.tables.iter().map(|t| t.entries[0].dist).collect();
        if now == last {
            break;
        }
        last = now;
    }
    last
}

/// Connected unit-disk graph of `n` nodes, redrawn until connected.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, radius: f64, range: f64) -> Vec<Position> {
    loop {
        let pts: Vec<Position> = (0..n).map(|_| geometry::uniform_in_disk(rng, radius)).collect();
        if is_connected(&pts, range) {
            return pts;
        }
    }
}

/// Quick pass of every oracle check at reduced sample counts.
pub fn run_all(seed: u64) -> Vec<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 10_000.0;
    let mut out = Vec::new();

    // Border arcs.
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 200 {
        let tx = geometry::uniform_in_disk(&mut rng, radius);
        let cj = geometry::uniform_in_disk(&mut rng, radius);
        let (rx_range, cj_range) = (rng.random_range(500.0..8000.0), rng.random_range(500.0..12_000.0));
        let (_, denom) = sampled_exposure_counts(tx, rx_range, cj, cj_range, radius, 100_000);
        if denom < 2_000 {
            continue;
        }
        checked += 1;
        let exact = geometry::eavesdropper_exposure(tx, rx_range, cj, cj_range, radius);
        worst = worst.max((exact - sampled_exposure(tx, rx_range, cj, cj_range, radius, 100_000)).abs());
    }
    out.push(report("exposure-vs-sampling", worst <= 0.005, format!("max |diff| {worst:.2e} over 200 instances")));

    let third = geometry::adversarial_jam_fraction(Position::new(radius, 0.0), radius, radius);
    let sampled = sampled_jam_fraction(Position::new(radius, 0.0), radius, radius, 100_000);
    out.push(report(
        "border-jammer-third",
        (third - 1.0 / 3.0).abs() < 1e-6 && (sampled - 1.0 / 3.0).abs() < 0.005,
        format!("analytic {third:.9}, sampled {sampled:.5}"),
    ));

    // Next-hop rules.
    let mut mismatches = 0;
    for _ in 0..1000 {
        let at = geometry::uniform_in_disk(&mut rng, radius);
        let n = rng.random_range(0..8);
        let cands = random_candidates(&mut rng, 0, at, n);
        for protocol in ProtocolKind::ALL {
            let view = if protocol == ProtocolKind::MinDistance { unjammed(&cands) } else { cands.clone() };
            let table = table_from_candidates(0, at, &view);
            if library_next_hop(&table, protocol) != exhaustive_next_hop(0, at, &view, protocol) {
                mismatches += 1;
            }
        }
    }
    out.push(report("next-hop-vs-exhaustive", mismatches == 0, format!("{mismatches} mismatches over 3000 scans")));

    // Distance vectors.
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let pts = random_connected_graph(&mut rng, 15, 5000.0, 2500.0);
        let dest = rng.random_range(0..pts.len());
        let dv = converge_distance_vector(&pts, 2500.0, dest, 100);
        let sp = dijkstra(&pts, 2500.0, dest);
        for (a, b) in dv.iter().zip(&sp) {
            worst = worst.max((a - b).abs() / b.max(1.0));
        }
    }
    out.push(report("distance-vector-vs-dijkstra", worst < 1e-9, format!("max rel diff {worst:.2e} over 20 graphs")));

    // Gradients.
    let cfg = ActorCriticConfig {
        hidden: [6, 5],
        ..ActorCriticConfig::default()
    };
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 10 {
        let params = random_params(4, &cfg, &mut rng);
        let state: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        if near_kink(&params.actor, &state, 1e-3) || near_kink(&params.critic, &state, 1e-3) {
            continue;
        }
        checked += 1;
        let action = Action::from_index(rng.random_range(0..Action::COUNT));
        worst = worst.max(gradient_error(&params, &state, action));
    }
    out.push(report("gradients-vs-finite-differences", worst < 1e-4, format!("max rel error {worst:.2e}")));

    // Tabular fixed point.
    let mdp = ToyMdp::two_by_two();
    let vi = mdp.value_iteration(1e-13);
    let table = mdp.tabular_sweeps(0.5, 2_000);
    let err = (0..2)
        .flat_map(|s| (0..2).map(move |a| (s, a)))
        .map(|(s, a)| (table.get(&s, Action::from_index(a)) - vi[s][a]).abs())
        .fold(0.0f64, f64::max);
    out.push(report("tabular-vs-value-iteration", err < 1e-6, format!("max |diff| {err:.2e}")));

    // Sampling.
    let n = 100_000;
    let mean = (0..n).map(|_| geometry::uniform_in_disk(&mut rng, radius).norm()).sum::<f64>() / n as f64;
    out.push(report(
        "disk-mean-radius",
        (mean / (2.0 * radius / 3.0) - 1.0).abs() < 0.01,
        format!("mean {mean:.1} vs {:.1}", 2.0 * radius / 3.0),
    ));

    let mob = MobilityState { speed: 50.0, slot_duration: 1.0 };
    let ends: Vec<Position> = (0..2_000)
        .map(|_| (0..10_000).fold(Position::ORIGIN, |p, _| geometry::brownian_step(p, &mob, radius, &mut rng)))
        .collect();
    let p = angular_uniformity_pvalue(&ends, 8);
    out.push(report("brownian-circular-symmetry", p > 0.01, format!("p = {p:.3}")));

    let mut memory = ReplayMemory::new(10);
    for k in 0..10 {
        memory.push(crate::learning::Experience {
            state: vec![k as f64],
            action: Action::Wait,
            utility: 0.0,
            next_state: vec![k as f64],
        });
    }
    let mut counts = vec![0usize; 10];
    for _ in 0..100_000 {
        counts[memory.sample_index(&mut rng)] += 1;
    }
    let p = chi_square_uniform_pvalue(&counts);
    out.push(report("replay-sampling-uniform", p > 0.01, format!("p = {p:.3}")));

    out
}

/// True if any hidden pre-activation of `net` at `x` lies within `margin`
/// of the ReLU kink, where finite differences are not meaningful.
pub fn near_kink(net: &crate::learning::Mlp, x: &[f64], margin: f64) -> bool {
    let mut h = x.to_vec();
    let last = net.layers.len() - 1;
    for (l, layer) in net.layers.iter().enumerate() {
        let z: Vec<f64> = (0..layer.outputs)
            .map(|o| layer.bias[o] + (0..layer.inputs).map(|k| layer.weights[o * layer.inputs + k] * h[k]).sum::<f64>())
            .collect();
        if l == last {
            break;
        }
        if z.iter().any(|v| v.abs() < margin) {
            return true;
        }
        h = z.into_iter().map(|v| v.max(0.0)).collect();
    }
    false
}

/// Glorot-initialized networks with random biases, so no hidden unit sits
/// exactly on the ReLU kink (zero biases plus a dead layer would put the
/// next layer's pre-activations at exactly 0).
pub fn random_params<R: Rng + ?Sized>(input_len: usize, cfg: &ActorCriticConfig, rng: &mut R) -> ActorCriticParams {
    let mut p = ActorCriticParams::new(input_len, cfg, rng);
    for layer in p.actor.layers.iter_mut().chain(p.critic.layers.iter_mut()) {
        for b in layer.bias.iter_mut() {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    p
}

/// Worst relative error between analytic and finite-difference gradients
/// of `log pi(a|s)` and `Q(s,a)` at one point.
pub fn gradient_error(params: &ActorCriticParams, state: &[f64], action: Action) -> f64 {
    let eps = 1e-5;
    let analytic_actor = params.log_policy_gradient(state, action).expect("dims").flat();
    let numeric_actor = finite_difference_gradient(
        |theta| {
            let mut p = params.clone();
            p.actor.set_flat(theta).expect("dims");
            p.policy(state).expect("dims")[action.index()].ln()
        },
        &params.actor.flat(),
        eps,
    );
    let analytic_critic = params.critic_value_gradient(state, action).expect("dims").flat();
    let numeric_critic = finite_difference_gradient(
        |w| {
            let mut p = params.clone();
            p.critic.set_flat(w).expect("dims");
            p.q_values(state).expect("dims")[action.index()]
        },
        &params.critic.flat(),
        eps,
    );
    max_relative_error(&analytic_actor, &numeric_actor).max(max_relative_error(&analytic_critic, &numeric_critic))
}
