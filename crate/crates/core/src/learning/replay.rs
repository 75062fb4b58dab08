use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::Action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: Action,
    pub utility: f64,
    pub next_state: Vec<f64>,
}

/// Bounded FIFO of experiences; the oldest entry is evicted first.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayMemory {
    buf: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        Self {
            buf: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity: capacity.max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, exp: Experience) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(exp);
    }

    pub fn get(&self, i: usize) -> Option<&Experience> {
        self.buf.get(i)
    }

    /// Uniform index, with replacement. Panics on an empty memory.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.buf.len())
    }
}
