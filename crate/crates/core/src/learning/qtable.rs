use std::collections::HashMap;
use std::hash::Hash;

use crate::agents::Action;

/// Tabular action values; unseen entries read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable<S: Hash + Eq> {
    values: HashMap<S, [f64; Action::COUNT]>,
    pub alpha: f64,
    pub gamma: f64,
}

impl<S: Hash + Eq + Clone> QTable<S> {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        Self {
            values: HashMap::new(),
            alpha,
            gamma,
        }
    }

    pub fn values(&self, s: &S) -> [f64; Action::COUNT] {
        self.values.get(s).copied().unwrap_or([0.0; Action::COUNT])
    }

    pub fn get(&self, s: &S, a: Action) -> f64 {
        self.values(s)[a.index()]
    }

    pub fn set(&mut self, s: S, a: Action, q: f64) {
        self.values.entry(s).or_insert([0.0; Action::COUNT])[a.index()] = q;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (p + gamma max_b Q(s', b))`.
    pub fn q_update(&mut self, s: &S, a: Action, p: f64, s_next: &S) {
        let max_next = self
            .values(s_next)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let old = self.get(s, a);
        let new = (1.0 - self.alpha) * old + self.alpha * (p + self.gamma * max_next);
        self.set(s.clone(), a, new);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn myopic_limit() {
        let mut q = QTable::new(1.0, 0.0);
        q.set(1u8, Action::Transmit, 50.0);
        q.q_update(&0u8, Action::Wait, 7.5, &1u8);
        assert_eq!(q.get(&0, Action::Wait), 7.5);
    }

    #[test]
    fn hand_evaluation() {
        let mut q = QTable::new(0.5, 0.9);
        q.set(1u8, Action::Receive, 2.0);
        q.q_update(&0u8, Action::Transmit, 10.0, &1u8);
        assert!((q.get(&0, Action::Transmit) - 5.9).abs() < 1e-12);
    }

    #[test]
    fn geometric_contraction() {
        let alpha = 0.3;
        let mut q = QTable::new(alpha, 0.0);
        q.set(0u8, Action::Wait, 8.0);
        for k in 1..=10 {
            q.q_update(&0u8, Action::Wait, 0.0, &1u8);
            let expected = 8.0 * (1.0 - alpha).powi(k);
            assert!((q.get(&0, Action::Wait) - expected).abs() < 1e-12);
        }
    }
}
