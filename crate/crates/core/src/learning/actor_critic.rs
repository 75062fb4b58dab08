//! Actor-critic pair over the one-hot observation.
//!
//! The critic maps a state to one value per action; it is trained by a
//! semi-gradient step toward `p + gamma * max_a Q(s', a)`. The actor maps a
//! state to a softmax policy and follows `Q(s, a) * grad log pi(a | s)`,
//! with the critic's value held constant.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::{softmax, Mlp};
use super::replay::{Experience, ReplayMemory};
use crate::agents::Action;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActorCriticConfig {
    pub hidden: [usize; 2],
    /// Actor learning rate.
    pub alpha: f64,
    /// Critic learning rate.
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ActorCriticConfig {
    fn default() -> Self {
        Self {
            hidden: [64, 64],
            alpha: 1e-3,
            beta: 1e-3,
            gamma: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCriticParams {
    pub actor: Mlp,
    pub critic: Mlp,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ActorCriticParams {
    pub fn new<R: Rng + ?Sized>(input_len: usize, cfg: &ActorCriticConfig, rng: &mut R) -> Self {
        let sizes = [input_len, cfg.hidden[0], cfg.hidden[1], Action::COUNT];
        Self {
            actor: Mlp::new(&sizes, rng),
            critic: Mlp::new(&sizes, rng),
            alpha: cfg.alpha,
            beta: cfg.beta,
            gamma: cfg.gamma,
        }
    }

    /// Weight snapshot of both networks and the step sizes, as JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Restores a snapshot written by [`Self::to_json`], rejecting layer
    /// shapes that do not chain or a head that is not one value per action.
    pub fn from_json(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text)?;
        for net in [&params.actor, &params.critic] {
            check_shapes(net)?;
        }
        if params.actor.input_len() != params.critic.input_len() {
            return Err(Error::DimensionMismatch {
                expected: params.actor.input_len(),
                got: params.critic.input_len(),
            });
        }
        Ok(params)
    }

    pub fn policy(&self, state: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.actor.forward(state)?))
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.critic.forward(state)
    }

    /// Bootstrapped target `p + gamma * max_a Q(s', a)`.
    pub fn td_target(&self, exp: &Experience) -> Result<f64> {
        let next = self.q_values(&exp.next_state)?;
        let max_next = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(exp.utility + self.gamma * max_next)
    }

    /// Squared TD error of the critic on one experience.
    pub fn critic_loss(&self, exp: &Experience) -> Result<f64> {
        let q = self.q_values(&exp.state)?[exp.action.index()];
        Ok((self.td_target(exp)? - q).powi(2))
    }

    /// Gradient of `Q_w(s, a)` with respect to the critic weights.
    pub fn critic_value_gradient(&self, state: &[f64], action: Action) -> Result<Mlp> {
        let trace = self.critic.trace(state)?;
        let mut g = vec![0.0; Action::COUNT];
        g[action.index()] = 1.0;
        Ok(self.critic.backward(&trace, &g))
    }

    /// Gradient of `log pi_theta(a | s)` with respect to the actor weights.
    pub fn log_policy_gradient(&self, state: &[f64], action: Action) -> Result<Mlp> {
        let trace = self.actor.trace(state)?;
        let pi = softmax(&trace.output);
        let g: Vec<f64> = pi
            .iter()
            .enumerate()
            .map(|(k, p)| if k == action.index() { 1.0 - p } else { -p })
            .collect();
        Ok(self.actor.backward(&trace, &g))
    }

    /// `w += beta * (target - Q_w(s, a)) * grad_w Q_w(s, a)`.
    pub fn critic_update(&mut self, exp: &Experience) -> Result<()> {
        let trace = self.critic.trace(&exp.state)?;
        let residual = self.td_target(exp)? - trace.output[exp.action.index()];
        if residual == 0.0 {
            return Ok(());
        }
        let mut g = vec![0.0; Action::COUNT];
        g[exp.action.index()] = 1.0;
        let grads = self.critic.backward(&trace, &g);
        self.critic.add_scaled(&grads, self.beta * residual);
        Ok(())
    }

    /// `theta += alpha * grad_theta log pi(a | s) * Q_w(s, a)`.
    pub fn actor_update(&mut self, exp: &Experience) -> Result<()> {
        let q = self.q_values(&exp.state)?[exp.action.index()];
        if q == 0.0 {
            return Ok(());
        }
        let grads = self.log_policy_gradient(&exp.state, exp.action)?;
        self.actor.add_scaled(&grads, self.alpha * q);
        Ok(())
    }
}

fn check_shapes(net: &Mlp) -> Result<()> {
    let mismatch = |expected: usize, got: usize| Err(Error::DimensionMismatch { expected, got });
    if net.layers.is_empty() {
        return mismatch(1, 0);
    }
    for w in net.layers.windows(2) {
        if w[0].outputs != w[1].inputs {
            return mismatch(w[0].outputs, w[1].inputs);
        }
    }
    for l in &net.layers {
        if l.weights.len() != l.inputs * l.outputs {
            return mismatch(l.inputs * l.outputs, l.weights.len());
        }
        if l.bias.len() != l.outputs {
            return mismatch(l.outputs, l.bias.len());
        }
    }
    if net.output_len() != Action::COUNT {
        return mismatch(Action::COUNT, net.output_len());
    }
    Ok(())
}

/// Draws `batch_size` experiences uniformly with replacement and applies a
/// critic step then an actor step for each. No-op on an empty memory.
pub fn replay_cycle<R: Rng + ?Sized>(
    memory: &ReplayMemory,
    batch_size: usize,
    params: &mut ActorCriticParams,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if memory.is_empty() {
        return Ok(Vec::new());
    }
    let mut drawn = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let i = memory.sample_index(rng);
        let exp = memory.get(i).expect("index in range");
        params.critic_update(exp)?;
        params.actor_update(exp)?;
        drawn.push(i);
    }
    Ok(drawn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny(seed: u64) -> ActorCriticParams {
        let cfg = ActorCriticConfig {
            hidden: [4, 3],
            alpha: 0.05,
            beta: 0.05,
            gamma: 0.9,
        };
        ActorCriticParams::new(3, &cfg, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn exp(utility: f64) -> Experience {
        Experience {
            state: vec![1.0, 0.0, 0.5],
            action: Action::Receive,
            utility,
            next_state: vec![0.0, 1.0, 0.0],
        }
    }

    #[test]
    fn snapshot_round_trips_exactly() {
        let mut p = tiny(4);
        p.critic_update(&exp(2.5)).unwrap();
        p.actor_update(&exp(2.5)).unwrap();
        let back = ActorCriticParams::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn snapshot_rejects_bad_shapes() {
        let mut p = tiny(4);
        p.critic.layers[1].bias.pop();
        assert!(matches!(
            ActorCriticParams::from_json(&p.to_json().unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ActorCriticParams::from_json("{}").is_err());
    }

    #[test]
    fn loss_is_squared_residual() {
        let mut p = tiny(1);
        p.gamma = 0.0;
        p.critic = Mlp::zeros(&[3, 4, 3, 5]);
        assert_eq!(p.critic_loss(&exp(2.0)).unwrap(), 4.0);
    }

    #[test]
    fn zero_residual_leaves_critic_unchanged() {
        let mut p = tiny(2);
        let e = exp(0.0);
        // choose the utility that makes the target equal Q(s, a)
        let q = p.q_values(&e.state).unwrap()[e.action.index()];
        let e = Experience {
            utility: q - p.gamma * p.q_values(&e.next_state).unwrap().iter().copied().fold(f64::MIN, f64::max),
            ..e
        };
        assert!(p.critic_loss(&e).unwrap() < 1e-24);
        let before = p.critic.clone();
        p.critic_update(&e).unwrap();
        for (a, b) in before.flat().iter().zip(p.critic.flat()) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_q_leaves_actor_unchanged() {
        let mut p = tiny(3);
        p.critic = Mlp::zeros(&[3, 4, 3, 5]);
        let before = p.actor.clone();
        p.actor_update(&exp(5.0)).unwrap();
        assert_eq!(before, p.actor);
    }

    #[test]
    fn positive_q_raises_action_probability() {
        let mut p = tiny(4);
        p.alpha = 1e-3;
        let e = exp(1.0);
        // force a positive critic value for the taken action
        let last = p.critic.layers.last_mut().unwrap();
        last.bias[e.action.index()] = 10.0;
        let before = p.policy(&e.state).unwrap()[e.action.index()];
        p.actor_update(&e).unwrap();
        let after = p.policy(&e.state).unwrap()[e.action.index()];
        assert!(after > before);
    }

    #[test]
    fn replay_single_item_sampled_twice() {
        let mut m = ReplayMemory::new(10);
        m.push(exp(1.0));
        let mut p = tiny(5);
        let drawn = replay_cycle(&m, 2, &mut p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(drawn, vec![0, 0]);
    }

    #[test]
    fn one_dimensional_delta_rule() {
        // critic reduced to one live path: Q(s, a) = w3 * relu(w2 * relu(w1 * x))
        let mut p = tiny(6);
        p.gamma = 0.0;
        p.beta = 0.1;
        p.critic = Mlp::zeros(&[1, 1, 1, 5]);
        p.critic.set_flat(&[1.0, 0.0, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let e = Experience {
            state: vec![2.0],
            action: Action::Receive,
            utility: 3.0,
            next_state: vec![0.0],
        };
        // Q = 0.5 * 2 = 1, residual = 2; dQ/dw3 = 2, dQ/db = 1
        p.critic_update(&e).unwrap();
        let last = &p.critic.layers[2];
        assert_relative_eq!(last.weights[1], 0.5 + 0.1 * 2.0 * 2.0, epsilon = 1e-12);
        assert_relative_eq!(last.bias[1], 0.1 * 2.0, epsilon = 1e-12);
        // first layer: dQ/dw1 = w3 * w2 * x = 1.0, so w1 += 0.1 * 2 * 1
        assert_relative_eq!(p.critic.layers[0].weights[0], 1.0 + 0.1 * 2.0 * 1.0, epsilon = 1e-12);
    }
}
