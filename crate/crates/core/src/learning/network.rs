//! Small fully connected network: ReLU hidden layers, affine output head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major, `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).fold(*b, |acc, (w, v)| acc + w * v))
            .collect()
    }
}

/// Activations recorded by [`Mlp::trace`]: the input to every layer plus the
/// final output.
#[derive(Debug, Clone)]
pub struct Trace {
    inputs: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

impl Mlp {
    /// `sizes` lists layer widths from input to output.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        Self {
            layers: sizes.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect(),
        }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn input_len(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(x)?.output)
    }

    pub fn trace(&self, x: &[f64]) -> Result<Trace> {
        if x.len() != self.input_len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_len(),
                got: x.len(),
            });
        }
        let last = self.layers.len().saturating_sub(1);
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(&h);
            if k < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            inputs.push(std::mem::replace(&mut h, z));
        }
        Ok(Trace { inputs, output: h })
    }

    /// Gradient of `sum_k grad_out[k] * output[k]` with respect to every
    /// parameter, laid out like the network itself.
    pub fn backward(&self, trace: &Trace, grad_out: &[f64]) -> Mlp {
        let mut grads = Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.inputs, l.outputs))
                .collect(),
        };
        let mut delta = grad_out.to_vec();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &trace.inputs[k];
            let g = &mut grads.layers[k];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                g.bias[o] = *d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (w, x) in row.iter_mut().zip(input) {
                    *w = d * x;
                }
            }
            if k == 0 {
                break;
            }
            // Back through this layer's weights, then the previous ReLU.
            let mut prev = vec![0.0; layer.inputs];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            for (p, a) in prev.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
        grads
    }

    /// `self += scale * grads`.
    pub fn add_scaled(&mut self, grads: &Mlp, scale: f64) {
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            l.weights.iter_mut().zip(&g.weights).for_each(|(w, d)| *w += scale * d);
            l.bias.iter_mut().zip(&g.bias).for_each(|(b, d)| *b += scale * d);
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in self.layers.iter_mut() {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.flat().iter().all(|p| p.is_finite())
    }
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs() {
        let net = Mlp::zeros(&[4, 3, 3, 5]);
        let out = net.forward(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(out, vec![0.0; 5]);
        for p in softmax(&out) {
            assert_relative_eq!(p, 0.2);
        }
    }

    #[test]
    fn single_path_composition() {
        // 1-1-1-1: relu(2x + 1) -> relu(3h - 1) -> 0.5h + 2
        let mut net = Mlp::zeros(&[1, 1, 1, 1]);
        net.set_flat(&[2.0, 1.0, 3.0, -1.0, 0.5, 2.0]).unwrap();
        let f = |x: f64| 0.5 * (3.0 * (2.0 * x + 1.0f64).max(0.0) - 1.0).max(0.0) + 2.0;
        for x in [-3.0, -0.4, 0.0, 0.7, 2.5] {
            assert_relative_eq!(net.forward(&[x]).unwrap()[0], f(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let net = Mlp::zeros(&[3, 2, 2, 1]);
        assert!(matches!(
            net.forward(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn softmax_normalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let net = Mlp::new(&[6, 8, 8, 5], &mut rng);
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = softmax(&net.forward(&x).unwrap());
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn flat_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::new(&[3, 4, 4, 2], &mut rng);
        let mut other = Mlp::zeros(&[3, 4, 4, 2]);
        other.set_flat(&net.flat()).unwrap();
        assert_eq!(net, other);
    }
}
