//! Deployment, mobility and planar geometry on the network disk.
//!
//! The network area is a disk of radius `radius` centered at the origin.
//! Blue-force nodes live inside it; red-force nodes sit on its border.

use std::f64::consts::PI;

use rand::Rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, phi: f64) -> Self {
        Self::new(r * phi.cos(), r * phi.sin())
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn bearing(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub source: usize,
    pub destination: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub radius: f64,
    pub blue_nodes: Vec<Position>,
    pub red_eavesdroppers: Vec<Position>,
    pub red_jammers: Vec<Position>,
    pub red_transmitters: Vec<Position>,
    pub flows: Vec<Flow>,
}

impl NetworkLayout {
    pub fn n_blue(&self) -> usize {
        self.blue_nodes.len()
    }

    pub fn n_red(&self) -> usize {
        self.red_eavesdroppers.len() + self.red_jammers.len() + self.red_transmitters.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityState {
    /// Meters per second.
    pub speed: f64,
    /// Seconds per slot.
    pub slot_duration: f64,
}

impl MobilityState {
    pub fn step_length(&self) -> f64 {
        self.speed * self.slot_duration
    }
}

impl Default for MobilityState {
    fn default() -> Self {
        Self {
            speed: 1.0,
            slot_duration: 1.0,
        }
    }
}

/// Area-uniform point in the disk of the given radius.
pub fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Position {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    Position::polar(r, phi)
}

pub fn uniform_on_border<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Position {
    Position::polar(radius, 2.0 * PI * rng.random::<f64>())
}

/// Deploys blue nodes uniformly over the disk, red nodes uniformly on its
/// border, and draws `n_flows` flows with pairwise-disjoint endpoints.
pub fn deploy_network(
    n_blue: usize,
    m_cj: usize,
    m_aj: usize,
    m_t: usize,
    radius: f64,
    n_flows: usize,
    seed: u64,
) -> Result<NetworkLayout> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Config(format!("radius must be positive, got {radius}")));
    }
    if n_flows > n_blue / 2 {
        return Err(Error::Config(format!(
            "{n_flows} flows need {} distinct endpoints but only {n_blue} blue nodes exist",
            2 * n_flows
        )));
    }
    let mut rng = rng::stream(seed, Stream::Layout);
    let blue_nodes = (0..n_blue).map(|_| uniform_in_disk(&mut rng, radius)).collect();
    let mut border = |n: usize| -> Vec<Position> {
        (0..n).map(|_| uniform_on_border(&mut rng, radius)).collect()
    };
    let red_eavesdroppers = border(m_cj);
    let red_jammers = border(m_aj);
    let red_transmitters = border(m_t);

    let mut ids: Vec<usize> = (0..n_blue).collect();
    ids.shuffle(&mut rng);
    let flows = ids
        .chunks_exact(2)
        .take(n_flows)
        .map(|pair| Flow {
            source: pair[0],
            destination: pair[1],
        })
        .collect();

    Ok(NetworkLayout {
        radius,
        blue_nodes,
        red_eavesdroppers,
        red_jammers,
        red_transmitters,
        flows,
    })
}

/// One Brownian slot: a step of length `speed * slot_duration` in a uniform
/// direction, specularly reflected at the disk boundary.
pub fn brownian_step<R: Rng + ?Sized>(
    pos: Position,
    mob: &MobilityState,
    radius: f64,
    rng: &mut R,
) -> Position {
    let phi = 2.0 * PI * rng.random::<f64>();
    reflect_walk(pos, (phi.cos(), phi.sin()), mob.step_length(), radius)
}

/// Moves `len` meters from `pos` along unit direction `dir`, reflecting off
/// the circle of radius `radius`.
pub fn reflect_walk(pos: Position, dir: (f64, f64), len: f64, radius: f64) -> Position {
    let (mut px, mut py) = (pos.x, pos.y);
    let (mut dx, mut dy) = dir;
    let mut remaining = len;
    for _ in 0..16 {
        if remaining <= 0.0 {
            break;
        }
        let (ex, ey) = (px + dx * remaining, py + dy * remaining);
        if ex * ex + ey * ey <= radius * radius {
            px = ex;
            py = ey;
            break;
        }
        // |p + t d| = radius, d unit: t^2 + 2 (p.d) t + |p|^2 - radius^2 = 0
        let b = px * dx + py * dy;
        let c = px * px + py * py - radius * radius;
        let t = (-b + (b * b - c).max(0.0).sqrt()).clamp(0.0, remaining);
        px += dx * t;
        py += dy * t;
        remaining -= t;
        let n = px.hypot(py);
        let (nx, ny) = (px / n, py / n);
        let dot = dx * nx + dy * ny;
        dx -= 2.0 * dot * nx;
        dy -= 2.0 * dot * ny;
    }
    let n = px.hypot(py);
    if n > radius {
        px *= radius / n;
        py *= radius / n;
    }
    Position::new(px, py)
}

/// Interior angle at `j` between rays `j -> i` and `j -> j_prime`, in [0, pi].
pub fn angle_at(j: Position, i: Position, j_prime: Position) -> Result<f64> {
    let (ax, ay) = (i.x - j.x, i.y - j.y);
    let (bx, by) = (j_prime.x - j.x, j_prime.y - j.y);
    let na = ax.hypot(ay);
    let nb = bx.hypot(by);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateGeometry("angle vertex coincides with an endpoint"));
    }
    let cos = ((ax * bx + ay * by) / (na * nb)).clamp(-1.0, 1.0);
    Ok(cos.acos())
}

/// An arc of the border circle: center bearing and angular half-width in
/// [0, pi]. A half-width of pi is the whole circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BorderArc {
    pub center: f64,
    pub half_width: f64,
}

impl BorderArc {
    pub const EMPTY: BorderArc = BorderArc {
        center: 0.0,
        half_width: 0.0,
    };

    pub fn angular_length(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, phi: f64) -> bool {
        let d = (phi - self.center).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) <= self.half_width
    }

    /// Angular measure of the intersection of two arcs.
    pub fn overlap(&self, other: &BorderArc) -> f64 {
        let (a1, a2) = (self.half_width, other.half_width);
        if a1 <= 0.0 || a2 <= 0.0 {
            return 0.0;
        }
        if a1 >= PI {
            return 2.0 * a2;
        }
        if a2 >= PI {
            return 2.0 * a1;
        }
        let delta = (other.center - self.center).rem_euclid(2.0 * PI);
        // Sum interval intersections over the neighbouring unwrappings.
        [-2.0 * PI, 0.0, 2.0 * PI]
            .iter()
            .map(|shift| {
                let c = delta + shift;
                ((a1).min(c + a2) - (-a1).max(c - a2)).max(0.0)
            })
            .sum::<f64>()
            .min(2.0 * a1.min(a2))
    }
}

/// The part of the border circle (radius `radius`, centered at the origin)
/// that lies inside the closed disk of radius `range` around `center`.
pub fn border_arc_in_disk(center: Position, range: f64, radius: f64) -> BorderArc {
    if range <= 0.0 {
        return BorderArc::EMPTY;
    }
    let dist = center.norm();
    if dist == 0.0 {
        return if range >= radius {
            BorderArc {
                center: 0.0,
                half_width: PI,
            }
        } else {
            BorderArc::EMPTY
        };
    }
    // |R e(phi) - c|^2 <= range^2  <=>  cos(phi - phi_c) >= k
    let k = (radius * radius + dist * dist - range * range) / (2.0 * radius * dist);
    if k > 1.0 {
        BorderArc::EMPTY
    } else if k <= -1.0 {
        BorderArc {
            center: center.bearing(),
            half_width: PI,
        }
    } else {
        BorderArc {
            center: center.bearing(),
            half_width: k.acos(),
        }
    }
}

/// Fraction of the border inside the transmitter's reception disk that is
/// also inside the cooperative jammer's disk. Zero when the reception disk
/// does not reach the border.
pub fn eavesdropper_exposure(
    tx: Position,
    rx_range: f64,
    cj: Position,
    cj_range: f64,
    radius: f64,
) -> f64 {
    let reception = border_arc_in_disk(tx, rx_range, radius);
    let denom = reception.angular_length();
    if denom <= 0.0 {
        return 0.0;
    }
    let jammed = border_arc_in_disk(cj, cj_range, radius);
    (reception.overlap(&jammed) / denom).clamp(0.0, 1.0)
}

/// Fraction of the whole border inside the jammer's disk.
pub fn adversarial_jam_fraction(jammer: Position, jam_range: f64, radius: f64) -> f64 {
    (border_arc_in_disk(jammer, jam_range, radius).angular_length() / (2.0 * PI)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const R: f64 = 10_000.0;

    #[test]
    fn full_scale_deployment() {
        let layout = deploy_network(40, 3, 3, 4, R, 5, 11).unwrap();
        assert_eq!(layout.n_blue(), 40);
        assert_eq!(layout.n_red(), 10);
        assert_eq!(layout.flows.len(), 5);
        for p in &layout.blue_nodes {
            assert!(p.norm() <= R);
        }
        for p in layout.red_jammers.iter().chain(&layout.red_eavesdroppers) {
            assert_relative_eq!(p.norm(), R, max_relative = 1e-12);
        }
        let mut endpoints: Vec<usize> = layout
            .flows
            .iter()
            .flat_map(|f| [f.source, f.destination])
            .collect();
        endpoints.sort();
        endpoints.dedup();
        assert_eq!(endpoints.len(), 10);
    }

    #[test]
    fn empty_deployment() {
        let layout = deploy_network(0, 0, 0, 0, R, 0, 3).unwrap();
        assert_eq!(layout.n_blue(), 0);
        assert_eq!(layout.n_red(), 0);
        assert!(layout.flows.is_empty());
    }

    #[test]
    fn too_many_flows_is_a_config_error() {
        assert!(matches!(
            deploy_network(5, 0, 0, 0, R, 3, 0),
            Err(Error::Config(_))
        ));
        assert!(deploy_network(6, 0, 0, 0, R, 3, 0).is_ok());
    }

    #[test]
    fn deployment_is_seed_determined() {
        let a = deploy_network(20, 1, 1, 1, R, 4, 99).unwrap();
        let b = deploy_network(20, 1, 1, 1, R, 4, 99).unwrap();
        let c = deploy_network(20, 1, 1, 1, R, 4, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mean_radius_is_two_thirds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mean = (0..n).map(|_| uniform_in_disk(&mut rng, R).norm()).sum::<f64>() / n as f64;
        assert_relative_eq!(mean, 2.0 * R / 3.0, max_relative = 0.01);
    }

    #[test]
    fn zero_speed_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Position::new(120.0, -40.0);
        let mob = MobilityState {
            speed: 0.0,
            slot_duration: 1.0,
        };
        assert_eq!(brownian_step(p, &mob, R, &mut rng), p);
    }

    #[test]
    fn interior_step_has_exact_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mob = MobilityState::default();
        let p = Position::new(10.0, 20.0);
        for _ in 0..100 {
            let q = brownian_step(p, &mob, R, &mut rng);
            assert_relative_eq!(p.distance(&q), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn reflection_keeps_node_inside() {
        let p = Position::new(R - 0.5, 0.0);
        let q = reflect_walk(p, (1.0, 0.0), 2.0, R);
        assert_relative_eq!(q.x, R - 1.5, epsilon = 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mob = MobilityState {
            speed: 50.0,
            slot_duration: 1.0,
        };
        let mut pos = Position::new(0.0, R - 1.0);
        for _ in 0..10_000 {
            pos = brownian_step(pos, &mob, R, &mut rng);
            assert!(pos.norm() <= R + 1e-9);
        }
    }

    #[test]
    fn angles() {
        let o = Position::ORIGIN;
        let a = angle_at(o, Position::new(1.0, 0.0), Position::new(-2.0, 0.0)).unwrap();
        assert_relative_eq!(a, PI);
        let a = angle_at(o, Position::new(1.0, 0.0), Position::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(a, PI / 2.0);
        let a = angle_at(o, Position::new(1.0, 0.0), Position::new(1.0, 1.0)).unwrap();
        assert_relative_eq!(a, PI / 4.0, max_relative = 1e-12);
        assert!(angle_at(o, o, Position::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn jam_fraction_cases() {
        assert_eq!(adversarial_jam_fraction(Position::ORIGIN, R + 1.0, R), 1.0);
        assert_eq!(adversarial_jam_fraction(Position::new(3.0, 4.0), 0.0, R), 0.0);
        let on_border = Position::polar(R, 0.7);
        assert_relative_eq!(
            adversarial_jam_fraction(on_border, R, R),
            1.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn exposure_cases() {
        let tx = Position::new(R - 1000.0, 0.0);
        // jammer covering everything
        assert_eq!(eavesdropper_exposure(tx, 2000.0, Position::ORIGIN, 2.0 * R, R), 1.0);
        // jammer on the far side
        assert_eq!(eavesdropper_exposure(tx, 2000.0, Position::new(-R + 100.0, 0.0), 2000.0, R), 0.0);
        // reception disk away from the border
        assert_eq!(eavesdropper_exposure(Position::ORIGIN, 2000.0, tx, 5000.0, R), 0.0);
    }

    #[test]
    fn arc_overlap_wraps_around() {
        let a = BorderArc {
            center: PI - 0.1,
            half_width: 0.3,
        };
        let b = BorderArc {
            center: -PI + 0.1,
            half_width: 0.3,
        };
        assert_relative_eq!(a.overlap(&b), 0.4, epsilon = 1e-12);
        let big = BorderArc {
            center: 0.0,
            half_width: 3.0,
        };
        let big2 = BorderArc {
            center: PI,
            half_width: 3.0,
        };
        // overlap on both sides: total measure 2*3 + 2*3 - 2pi
        assert_relative_eq!(big.overlap(&big2), 12.0 - 2.0 * PI, epsilon = 1e-12);
    }
}
