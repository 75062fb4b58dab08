//! Slot-level simulator of an adversarial mobile wireless network.
//!
//! Blue-force nodes are deployed on a disk, move by Brownian motion, and
//! forward packets for a set of source/destination flows over a simplified
//! RTS/CTS MAC. Red-force nodes sit on the network border and eavesdrop,
//! jam, or run their own traffic. Each blue node picks one of five roles per
//! slot (transmit, receive, cooperative jam, adversarial jam, wait), either
//! from a fixed role assignment or from a per-node learner (tabular
//! Q-learning or an actor-critic pair of feedforward networks).
//!
//! Module map:
//!
//! - [`geometry`]: deployment, mobility, angles and border-arc measures
//! - [`channel`]: free-space path loss with log-normal shadowing, SINR
//! - [`mac`]: RTS/CTS/DATA/ACK handshake and the per-node observation
//! - [`routing`]: minimum-distance, jamming-avoiding and jamming-aware
//!   next-hop selection over distance-vector tables
//! - [`agents`]: actions, per-slot utilities, red-force behavior
//! - [`learning`]: tabular Q-learning, actor-critic, replay memory
//! - [`harness`]: configuration, slot loop, metrics, confidence bands, output
//! - [`oracles`]: brute-force and Monte Carlo reference computations used
//!   by the test suite and the `oracle` CLI subcommand

pub mod agents;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod learning;
pub mod mac;
pub mod oracles;
pub mod rng;
pub mod routing;

pub use error::{Error, Result};
