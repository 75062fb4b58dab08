//! A small grid where the straight path runs through a jammed relay. Shows
//! the next hop each protocol picks from the source.

use jamsim::geometry::{Flow, Position};
use jamsim::mac::{NodeQueues, Packet};
use jamsim::routing::{ProtocolKind, RoutingPlane};

fn main() {
    // 0 -- 1 -- 2 on the x axis, with a detour 3 -- 4 above it.
    let pos = vec![
        Position::new(0.0, 0.0),
        Position::new(2000.0, 0.0),
        Position::new(4000.0, 0.0),
        Position::new(1000.0, 1800.0),
        Position::new(3000.0, 1800.0),
    ];
    let flows = vec![Flow { source: 0, destination: 2 }];
    let mut jammed = vec![false; pos.len()];
    jammed[1] = true;
    let relay_ok = vec![true; pos.len()];

    let mut queue = NodeQueues::new(1);
    queue.push(Packet { id: 0, flow: 0, born: 0 });

    for protocol in ProtocolKind::ALL {
        let mut plane = RoutingPlane::new(protocol, 2500.0, flows.clone(), &pos);
        for _ in 0..10 {
            plane.round(&pos, &jammed, &relay_ok);
        }
        let route = plane.route_for(0, &queue);
        println!(
            "{protocol:<17} next hop {:?}, distance estimate {:.0} m",
            route.map(|r| r.next_hop),
            plane.tables[0].entries[0].dist
        );
    }
}
