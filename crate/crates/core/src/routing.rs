//! Geometric routing over distance-vector tables.
//!
//! Every node keeps, per flow, the relaxed path distance to the flow's
//! destination and its chosen next hop, plus a cache of its neighbors'
//! positions, jammed flags and their own per-flow entries (the two-hop view).
//! Three next-hop rules share these tables:
//!
//! - [`ProtocolKind::MinDistance`]: `argmin_j d_ij + d_jD`, blind to jamming.
//! - [`ProtocolKind::JammingAvoiding`]: same rule, but a jammed node's
//!   broadcast makes its neighbors treat its distances as infinite.
//! - [`ProtocolKind::JammingAware`]: over unjammed neighbors,
//!   `argmin_j d_ij / theta_ijj' + d_jD` where `theta_ijj'` is the angle at
//!   `j` between `i` and `j`'s own next hop `j'`.
//!
//! Ties are broken toward the smaller node id.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_at, Flow, Position};
use crate::mac::{FlowId, NodeId, NodeQueues, Route};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    MinDistance,
    JammingAvoiding,
    JammingAware,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [
        ProtocolKind::MinDistance,
        ProtocolKind::JammingAvoiding,
        ProtocolKind::JammingAware,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::MinDistance => "min-distance",
            ProtocolKind::JammingAvoiding => "jamming-avoiding",
            ProtocolKind::JammingAware => "jamming-aware",
        }
    }

    pub fn honors_jamming(self) -> bool {
        !matches!(self, ProtocolKind::MinDistance)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown protocol `{s}` (expected min-distance, jamming-avoiding or jamming-aware)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub next_hop: Option<NodeId>,
    /// Meters; `f64::INFINITY` when unreachable.
    pub dist: f64,
}

impl FlowEntry {
    pub const UNREACHABLE: FlowEntry = FlowEntry {
        next_hop: None,
        dist: f64::INFINITY,
    };
    pub const SINK: FlowEntry = FlowEntry {
        next_hop: None,
        dist: 0.0,
    };
}

/// A neighbor as seen from the owning node at the last refresh.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEntry {
    pub id: NodeId,
    pub position: Position,
    /// Euclidean distance d_ij.
    pub link: f64,
    pub jammed: bool,
    /// The neighbor's own entries (distance and next hop) per flow.
    pub entries: Vec<FlowEntry>,
    /// Position of the neighbor's next hop per flow, when it has one.
    pub onward: Vec<Option<(NodeId, Position)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    pub node: NodeId,
    pub position: Position,
    pub entries: Vec<FlowEntry>,
    pub neighbors: Vec<NeighborEntry>,
}

impl RoutingTable {
    pub fn new(node: NodeId, position: Position, flows: &[Flow]) -> Self {
        let entries = flows
            .iter()
            .map(|f| {
                if f.destination == node {
                    FlowEntry::SINK
                } else {
                    FlowEntry::UNREACHABLE
                }
            })
            .collect();
        Self {
            node,
            position,
            entries,
            neighbors: Vec::new(),
        }
    }

    pub fn neighbor(&self, id: NodeId) -> Option<&NeighborEntry> {
        self.neighbors.iter().find(|n| n.id == id)
    }
}

/// Blue nodes other than `node` within closed distance `range`.
pub fn neighbors(node: NodeId, positions: &[Position], range: f64) -> Vec<NodeId> {
    let me = positions[node];
    positions
        .iter()
        .enumerate()
        .filter(|&(j, p)| j != node && me.distance(p) <= range)
        .map(|(j, _)| j)
        .collect()
}

/// Rebuilds every table's neighbor cache from a snapshot of all tables.
/// Nodes with `relay_ok[j] == false` are advertised as unreachable except as
/// the destination of their own flows.
pub fn refresh_neighbor_cache(
    tables: &mut [RoutingTable],
    positions: &[Position],
    range: f64,
    jammed: &[bool],
    relay_ok: &[bool],
    flows: &[Flow],
) {
    let snapshot: Vec<Vec<FlowEntry>> = tables
        .iter()
        .enumerate()
        .map(|(j, t)| {
            if relay_ok[j] {
                t.entries.clone()
            } else {
                flows
                    .iter()
                    .map(|f| if f.destination == j { FlowEntry::SINK } else { FlowEntry::UNREACHABLE })
                    .collect()
            }
        })
        .collect();
    for (i, table) in tables.iter_mut().enumerate() {
        table.position = positions[i];
        table.neighbors = neighbors(i, positions, range)
            .into_iter()
            .map(|j| {
                let entries = snapshot[j].clone();
                let onward = entries
                    .iter()
                    .map(|e| e.next_hop.map(|k| (k, positions[k])))
                    .collect();
                NeighborEntry {
                    id: j,
                    position: positions[j],
                    link: positions[i].distance(&positions[j]),
                    jammed: jammed[j],
                    entries,
                    onward,
                }
            })
            .collect();
    }
}

/// Handles a jammed-status broadcast from `jammed_neighbor`: its distance
/// becomes infinite for every flow it does not terminate, and next hops are
/// recomputed without it. Broadcasts from unknown ids are ignored.
pub fn apply_jammed_broadcast(table: &mut RoutingTable, jammed_neighbor: NodeId, flows: &[Flow]) {
    let Some(nb) = table.neighbors.iter_mut().find(|n| n.id == jammed_neighbor) else {
        return;
    };
    nb.jammed = true;
    for (f, flow) in flows.iter().enumerate() {
        if flow.destination != jammed_neighbor {
            nb.entries[f] = FlowEntry::UNREACHABLE;
        }
    }
    for f in 0..table.entries.len() {
        if table.entries[f].dist == 0.0 {
            continue;
        }
        if table.entries[f].next_hop == Some(jammed_neighbor) {
            table.entries[f].next_hop = next_hop_min_distance(table, f);
        }
    }
}

/// Min-distance cost of relaying flow `flow` through neighbor `nb`.
fn min_distance_cost(nb: &NeighborEntry, flow: FlowId) -> f64 {
    nb.link + nb.entries[flow].dist
}

/// `argmin_j d_ij + d_jD` over neighbors with finite distance.
pub fn next_hop_min_distance(table: &RoutingTable, flow: FlowId) -> Option<NodeId> {
    argmin(table.neighbors.iter().map(|nb| (nb.id, min_distance_cost(nb, flow))))
}

/// Angle at neighbor `nb` between the owning node and the neighbor's own next
/// hop; pi when the neighbor has no onward hop. `None` when the onward hop is
/// the owning node itself (the route would loop back).
fn onward_angle(table: &RoutingTable, nb: &NeighborEntry, flow: FlowId) -> Option<f64> {
    match nb.onward[flow] {
        None => Some(PI),
        Some((k, _)) if k == table.node => None,
        Some((_, pos)) => angle_at(nb.position, table.position, pos).ok().or(Some(PI)),
    }
}

/// Jamming-aware cost of relaying flow `flow` through neighbor `nb`.
fn jamming_aware_cost(table: &RoutingTable, nb: &NeighborEntry, flow: FlowId) -> f64 {
    if nb.jammed && nb.entries[flow].dist != 0.0 {
        return f64::INFINITY;
    }
    match onward_angle(table, nb, flow) {
        Some(theta) if theta > 0.0 => nb.link / theta + nb.entries[flow].dist,
        _ => f64::INFINITY,
    }
}

/// `argmin_j d_ij / theta_ijj' + d_jD` over unjammed neighbors.
pub fn next_hop_jamming_aware(table: &RoutingTable, flow: FlowId) -> Option<NodeId> {
    argmin(
        table
            .neighbors
            .iter()
            .map(|nb| (nb.id, jamming_aware_cost(table, nb, flow))),
    )
}

fn argmin(candidates: impl Iterator<Item = (NodeId, f64)>) -> Option<NodeId> {
    let mut best: Option<(NodeId, f64)> = None;
    for (id, cost) in candidates {
        if !cost.is_finite() {
            continue;
        }
        best = match best {
            Some((bid, bc)) if bc < cost || (bc == cost && bid < id) => Some((bid, bc)),
            _ => Some((id, cost)),
        };
    }
    best.map(|(id, _)| id)
}

/// Cost of the table's current next hop for `flow` under `protocol`.
pub fn route_cost(table: &RoutingTable, flow: FlowId, protocol: ProtocolKind) -> f64 {
    let Some(hop) = table.entries[flow].next_hop else {
        return f64::INFINITY;
    };
    let Some(nb) = table.neighbor(hop) else {
        return f64::INFINITY;
    };
    match protocol {
        ProtocolKind::JammingAware => jamming_aware_cost(table, nb, flow),
        _ => min_distance_cost(nb, flow),
    }
}

/// One synchronous relaxation round over the cached neighbor snapshots:
/// destinations stay at 0, every other node takes
/// `min_j d_ij + d_jD` and that minimizer as its next hop. Distances above
/// `cap` are treated as unreachable.
pub fn update_distance_vector(tables: &mut [RoutingTable], flows: &[Flow], cap: f64) {
    for table in tables.iter_mut() {
        for (f, flow) in flows.iter().enumerate() {
            if flow.destination == table.node {
                table.entries[f] = FlowEntry::SINK;
                continue;
            }
            let hop = next_hop_min_distance(table, f);
            table.entries[f] = match hop.and_then(|h| table.neighbor(h)) {
                Some(nb) => {
                    let dist = min_distance_cost(nb, f);
                    if dist <= cap {
                        FlowEntry { next_hop: hop, dist }
                    } else {
                        FlowEntry::UNREACHABLE
                    }
                }
                None => FlowEntry::UNREACHABLE,
            };
        }
    }
}

/// Among flows with queued packets and a next hop, the one whose next hop
/// has the smallest protocol cost.
pub fn select_flow(table: &RoutingTable, queues: &NodeQueues, protocol: ProtocolKind) -> Option<Route> {
    let mut best: Option<(FlowId, f64)> = None;
    for f in queues.non_empty_flows() {
        let cost = route_cost(table, f, protocol);
        if !cost.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, bc)| cost < bc) {
            best = Some((f, cost));
        }
    }
    best.and_then(|(flow, _)| {
        table.entries[flow].next_hop.map(|next_hop| Route { flow, next_hop })
    })
}

/// The routing state of the whole blue network for one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingPlane {
    pub protocol: ProtocolKind,
    pub range: f64,
    pub flows: Vec<Flow>,
    pub tables: Vec<RoutingTable>,
}

impl RoutingPlane {
    pub fn new(protocol: ProtocolKind, range: f64, flows: Vec<Flow>, positions: &[Position]) -> Self {
        let tables = positions
            .iter()
            .enumerate()
            .map(|(i, p)| RoutingTable::new(i, *p, &flows))
            .collect();
        Self {
            protocol,
            range,
            flows,
            tables,
        }
    }

    /// Longest possible loop-free path; larger distances are stale.
    pub fn distance_cap(&self) -> f64 {
        self.tables.len() as f64 * self.range
    }

    /// One slot of control-plane work: refresh the two-hop caches, deliver
    /// jammed broadcasts (for protocols that honor them), relax distances
    /// once and choose next hops.
    pub fn round(&mut self, positions: &[Position], jammed: &[bool], relay_ok: &[bool]) {
        refresh_neighbor_cache(&mut self.tables, positions, self.range, jammed, relay_ok, &self.flows);
        if self.protocol.honors_jamming() {
            for table in self.tables.iter_mut() {
                let jammed_ids: Vec<NodeId> = table.neighbors.iter().filter(|n| n.jammed).map(|n| n.id).collect();
                for j in jammed_ids {
                    apply_jammed_broadcast(table, j, &self.flows);
                }
            }
        } else {
            for nb in self.tables.iter_mut().flat_map(|t| t.neighbors.iter_mut()) {
                nb.jammed = false;
            }
        }
        let cap = self.distance_cap();
        update_distance_vector(&mut self.tables, &self.flows, cap);
        if self.protocol == ProtocolKind::JammingAware {
            for table in self.tables.iter_mut() {
                for f in 0..self.flows.len() {
                    if table.entries[f].dist != 0.0 {
                        table.entries[f].next_hop = next_hop_jamming_aware(table, f);
                    }
                }
            }
        }
    }

    pub fn route_for(&self, node: NodeId, queues: &NodeQueues) -> Option<Route> {
        select_flow(&self.tables[node], queues, self.protocol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::Packet;

    fn line(n: usize, hop: f64) -> Vec<Position> {
        (0..n).map(|i| Position::new(i as f64 * hop, 0.0)).collect()
    }

    fn plane(protocol: ProtocolKind, positions: &[Position], flows: Vec<Flow>, range: f64) -> RoutingPlane {
        RoutingPlane::new(protocol, range, flows, positions)
    }

    #[test]
    fn neighbor_sets() {
        let pos = vec![Position::new(0.0, 0.0), Position::new(100.0, 0.0), Position::new(5000.0, 0.0)];
        assert_eq!(neighbors(2, &pos, 100.0), Vec::<NodeId>::new());
        assert_eq!(neighbors(0, &pos, 100.0), vec![1]);
        assert_eq!(neighbors(1, &pos, 100.0), vec![0]);
    }

    #[test]
    fn line_relaxation() {
        // s=0, m=1, d=2, hop 2000 with range 2500
        let pos = line(3, 2000.0);
        let flows = vec![Flow { source: 0, destination: 2 }];
        let mut p = plane(ProtocolKind::MinDistance, &pos, flows, 2500.0);
        let none = [false; 3];
        let ok = [true; 3];
        p.round(&pos, &none, &ok);
        assert_eq!(p.tables[2].entries[0], FlowEntry::SINK);
        assert_eq!(p.tables[1].entries[0].next_hop, Some(2));
        assert_eq!(p.tables[0].entries[0].next_hop, None);
        p.round(&pos, &none, &ok);
        assert_eq!(p.tables[0].entries[0].next_hop, Some(1));
        assert_eq!(p.tables[0].entries[0].dist, 4000.0);
        assert_eq!(p.tables[2].entries[0], FlowEntry::SINK);
    }

    #[test]
    fn jamming_the_only_next_hop() {
        let pos = line(3, 2000.0);
        let flows = vec![Flow { source: 0, destination: 2 }];
        let mut p = plane(ProtocolKind::JammingAvoiding, &pos, flows.clone(), 2500.0);
        for _ in 0..3 {
            p.round(&pos, &[false; 3], &[true; 3]);
        }
        let t = &mut p.tables[0];
        assert_eq!(t.entries[0].next_hop, Some(1));
        apply_jammed_broadcast(t, 1, &flows);
        assert_eq!(t.entries[0].next_hop, None);
        // stale broadcast from a non-neighbor
        let before = p.tables[0].clone();
        apply_jammed_broadcast(&mut p.tables[0], 2, &flows);
        assert_eq!(p.tables[0], before);
    }

    #[test]
    fn jamming_a_bystander_keeps_next_hop() {
        // 0 -> 1 -> 2 on a line, with bystander 3 next to 0
        let mut pos = line(3, 2000.0);
        pos.push(Position::new(0.0, 1500.0));
        let flows = vec![Flow { source: 0, destination: 2 }];
        let mut p = plane(ProtocolKind::JammingAvoiding, &pos, flows.clone(), 2500.0);
        for _ in 0..4 {
            p.round(&pos, &[false; 4], &[true; 4]);
        }
        assert_eq!(p.tables[0].entries[0].next_hop, Some(1));
        apply_jammed_broadcast(&mut p.tables[0], 3, &flows);
        assert_eq!(p.tables[0].entries[0].next_hop, Some(1));
    }

    #[test]
    fn min_distance_ties_go_to_smaller_id() {
        // 0 at origin, two symmetric relays 1 and 2, destination 3
        let pos = vec![
            Position::new(0.0, 0.0),
            Position::new(1000.0, 1000.0),
            Position::new(1000.0, -1000.0),
            Position::new(2000.0, 0.0),
        ];
        let flows = vec![Flow { source: 0, destination: 3 }];
        let mut p = plane(ProtocolKind::MinDistance, &pos, flows, 1500.0);
        for _ in 0..3 {
            p.round(&pos, &[false; 4], &[true; 4]);
        }
        assert_eq!(p.tables[0].entries[0].next_hop, Some(1));
    }

    #[test]
    fn aware_prefers_straight_onward_hop() {
        // Two neighbors with equal d_ij and d_jD; neighbor 1's next hop
        // continues straight (theta = pi), neighbor 2's turns 90 degrees.
        let table = RoutingTable {
            node: 0,
            position: Position::new(0.0, 0.0),
            entries: vec![FlowEntry::UNREACHABLE],
            neighbors: vec![
                NeighborEntry {
                    id: 2,
                    position: Position::new(0.0, 1000.0),
                    link: 1000.0,
                    jammed: false,
                    entries: vec![FlowEntry { next_hop: Some(8), dist: 3000.0 }],
                    onward: vec![Some((8, Position::new(1000.0, 1000.0)))],
                },
                NeighborEntry {
                    id: 1,
                    position: Position::new(1000.0, 0.0),
                    link: 1000.0,
                    jammed: false,
                    entries: vec![FlowEntry { next_hop: Some(9), dist: 3000.0 }],
                    onward: vec![Some((9, Position::new(2000.0, 0.0)))],
                },
            ],
        };
        assert_eq!(next_hop_jamming_aware(&table, 0), Some(1));
        let mut jammed = table.clone();
        jammed.neighbors[1].jammed = true;
        assert_eq!(next_hop_jamming_aware(&jammed, 0), Some(2));
        let mut lone = table.clone();
        lone.neighbors.truncate(1);
        assert_eq!(next_hop_jamming_aware(&lone, 0), Some(2));
    }

    #[test]
    fn select_flow_cases() {
        let pos = line(4, 1000.0);
        let flows = vec![
            Flow { source: 1, destination: 0 },
            Flow { source: 1, destination: 3 },
        ];
        let mut p = plane(ProtocolKind::MinDistance, &pos, flows, 1500.0);
        for _ in 0..4 {
            p.round(&pos, &[false; 4], &[true; 4]);
        }
        let mut q = NodeQueues::new(2);
        assert_eq!(p.route_for(1, &q), None);
        q.push(Packet { id: 0, flow: 1, born: 0 });
        assert_eq!(p.route_for(1, &q), Some(Route { flow: 1, next_hop: 2 }));
        q.push(Packet { id: 1, flow: 0, born: 0 });
        // flow 0 costs 1000 (direct), flow 1 costs 2000
        assert_eq!(p.route_for(1, &q), Some(Route { flow: 0, next_hop: 0 }));
    }

    #[test]
    fn protocol_names_round_trip() {
        for p in ProtocolKind::ALL {
            assert_eq!(p.name().parse::<ProtocolKind>().unwrap(), p);
        }
        assert!("gpsr".parse::<ProtocolKind>().is_err());
    }
}
