//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream derived from the
//! run seed, so adding draws in one subsystem never perturbs another. Link
//! shadowing is counter-based: the value for a (slot, tx, rx) triple is a
//! pure function of the run seed, which keeps node trajectories and channel
//! draws identical across routing protocols that share a seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Named stream identifiers. Per-node streams are offset by the node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Layout,
    Mobility,
    Traffic,
    Roles,
    Backoff,
    Policy(usize),
    WeightInit(usize),
    Replay(usize),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Layout => 1,
            Stream::Mobility => 2,
            Stream::Traffic => 3,
            Stream::Roles => 4,
            Stream::Backoff => 5,
            Stream::Policy(i) => 1_000 + i as u64,
            Stream::WeightInit(i) => 100_000 + i as u64,
            Stream::Replay(i) => 200_000 + i as u64,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard normal draw keyed by (seed, slot, tx, rx): two hashed uniforms
/// through Box-Muller.
pub fn keyed_normal(seed: u64, slot: u64, tx: u64, rx: u64) -> f64 {
    let h1 = mix(mix(mix(seed ^ 0x5348_4144_4f57) ^ slot) ^ (tx << 32 | rx));
    let h2 = mix(h1 ^ 0x6a09_e667_f3bc_c909);
    let scale = 1.0 / (1u64 << 53) as f64;
    let u1 = ((h1 >> 11) as f64 + 0.5) * scale;
    let u2 = (h2 >> 11) as f64 * scale;
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
