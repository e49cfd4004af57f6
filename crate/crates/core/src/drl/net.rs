//! Dense feed-forward networks with explicit backpropagation and an
//! adaptive-moment (Adam) optimizer. Small and allocation-light: everything
//! the hybrid agent needs, nothing more.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Linear,
    Relu,
    /// Standard logistic; maps pre-activations into (0, 1).
    Logistic,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Relu => x.max(0.0),
            Activation::Logistic => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// Derivative expressed through the post-activation value.
    fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Logistic => y * (1.0 - y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `[out_dim × in_dim]`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
}

/// Post-activation values of every layer (index 0 is the input).
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("non-empty cache")
    }
}

/// Per-layer parameter gradients, same shapes as the layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Grads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Grads {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Grads) {
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            for (a, b) in mine.0.iter_mut().zip(&theirs.0) {
                *a += b;
            }
            for (a, b) in mine.1.iter_mut().zip(&theirs.1) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in self.layers.iter_mut() {
            layer.0.iter_mut().for_each(|g| *g *= factor);
            layer.1.iter_mut().for_each(|g| *g *= factor);
        }
    }
}

impl DenseNet {
    /// Builds a net with the given layer widths; `dims.len() - 1` layers
    /// with one activation tag each. Uniform fan-based initialization.
    pub fn new(dims: &[usize], activations: &[Activation], rng: &mut ChaCha12Rng) -> Result<Self> {
        if dims.len() < 2 || activations.len() != dims.len() - 1 {
            return Err(Error::ShapeMismatch("layer dims/activations disagree".into()));
        }
        let mut layers = Vec::with_capacity(activations.len());
        for (i, &act) in activations.iter().enumerate() {
            let (fan_in, fan_out) = (dims[i], dims[i + 1]);
            let limit = match act {
                Activation::Relu => (6.0 / fan_in as f64).sqrt(),
                _ => (6.0 / (fan_in + fan_out) as f64).sqrt(),
            };
            let weights = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect();
            layers.push(Layer {
                in_dim: fan_in,
                out_dim: fan_out,
                weights,
                biases: vec![0.0; fan_out],
                activation: act,
            });
        }
        Ok(DenseNet { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(input)?.activations.pop().expect("non-empty"))
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        if input.len() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input width {} != expected {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for layer in &self.layers {
            let prev = activations.last().expect("non-empty");
            let mut out = Vec::with_capacity(layer.out_dim);
            for o in 0..layer.out_dim {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let z: f64 =
                    row.iter().zip(prev).map(|(w, x)| w * x).sum::<f64>() + layer.biases[o];
                out.push(layer.activation.apply(z));
            }
            activations.push(out);
        }
        Ok(ForwardCache { activations })
    }

    /// Backpropagates `upstream` (dL/d output) through the cached forward
    /// pass; returns parameter gradients and dL/d input.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<(Grads, Vec<f64>)> {
        if upstream.len() != self.output_dim() {
            return Err(Error::ShapeMismatch("upstream gradient width mismatch".into()));
        }
        let mut grads = Grads::zeros_like(self);
        let mut delta = upstream.to_vec();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let outputs = &cache.activations[idx + 1];
            let inputs = &cache.activations[idx];
            // through the activation
            for (d, &y) in delta.iter_mut().zip(outputs) {
                *d *= layer.activation.derivative(y);
            }
            let (dw, db) = &mut grads.layers[idx];
            let mut next_delta = vec![0.0; layer.in_dim];
            for o in 0..layer.out_dim {
                db[o] += delta[o];
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for i in 0..layer.in_dim {
                    dw[o * layer.in_dim + i] += delta[o] * inputs[i];
                    next_delta[i] += delta[o] * row[i];
                }
            }
            delta = next_delta;
        }
        Ok((grads, delta))
    }
}

/// Elementwise Polyak blend `target ← (1-τ) target + τ online`.
pub fn polyak_update(target: &mut DenseNet, online: &DenseNet, tau: f64) -> Result<()> {
    if target.layers.len() != online.layers.len() {
        return Err(Error::ShapeMismatch("target/online layer counts differ".into()));
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        if t.weights.len() != o.weights.len() || t.biases.len() != o.biases.len() {
            return Err(Error::ShapeMismatch("target/online layer shapes differ".into()));
        }
        for (tw, ow) in t.weights.iter_mut().zip(&o.weights) {
            *tw = (1.0 - tau) * *tw + tau * ow;
        }
        for (tb, ob) in t.biases.iter_mut().zip(&o.biases) {
            *tb = (1.0 - tau) * *tb + tau * ob;
        }
    }
    Ok(())
}

/// Adam optimizer state for one network (first/second moments per
/// parameter, bias-corrected).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(net: &DenseNet, learning_rate: f64, beta1: f64, beta2: f64) -> Self {
        let n = net.num_params();
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon: 1e-8,
            step_count: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    /// One descent step (minimization) along `grads`.
    pub fn step(&mut self, net: &mut DenseNet, grads: &Grads) -> Result<()> {
        if grads.layers.len() != net.layers.len() {
            return Err(Error::ShapeMismatch("gradient/net layer counts differ".into()));
        }
        self.step_count += 1;
        let t = self.step_count as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        let mut idx = 0;
        for (layer, (dw, db)) in net.layers.iter_mut().zip(&grads.layers) {
            for (p, g) in layer.weights.iter_mut().zip(dw).chain(layer.biases.iter_mut().zip(db)) {
                let m = &mut self.m[idx];
                let v = &mut self.v[idx];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                idx += 1;
            }
        }
        Ok(())
    }
}
