//! From-scratch feed-forward classifier: dense layers, relu/tanh hidden
//! activations, linear logits, and exact reverse-mode gradients for both
//! parameters and inputs. Everything is f64; everything is deterministic
//! given the seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Input width, hidden widths, then the two output logits.
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub seed: u64,
}

impl NetConfig {
    pub fn new(input_len: usize, hidden: &[usize], activation: Activation, seed: u64) -> Self {
        let mut layer_widths = Vec::with_capacity(hidden.len() + 2);
        layer_widths.push(input_len);
        layer_widths.extend_from_slice(hidden);
        layer_widths.push(2);
        NetConfig { layer_widths, activation, seed }
    }

    pub fn input_len(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn validate(&self, input_len: usize) -> Result<()> {
        if self.layer_widths.len() < 3 {
            return Err(Error::config("network needs at least one hidden layer"));
        }
        if self.layer_widths[0] != input_len {
            return Err(Error::config(format!(
                "network input width {} does not match the {input_len} inputs",
                self.layer_widths[0]
            )));
        }
        if *self.layer_widths.last().unwrap() != 2 {
            return Err(Error::config("network must end in two class logits"));
        }
        if self.layer_widths.iter().any(|&w| w == 0) {
            return Err(Error::config("zero-width layer"));
        }
        Ok(())
    }
}

/// One dense layer; weights are row-major, `weights[out * in_dim + in]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Layer { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], biases: vec![0.0; out_dim] }
    }

    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut z = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            out.push(z);
        }
    }

    /// Accumulates W^T delta into `out`.
    pub(crate) fn backward_input(&self, delta: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.in_dim, 0.0);
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let d = delta[o];
            for (acc, w) in out.iter_mut().zip(row) {
                *acc += w * d;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetModel {
    pub layers: Vec<Layer>,
    pub activation: Activation,
}

/// Pre-activations and activations of one forward pass. `activations[0]` is
/// the input; the last pre-activation row holds the logits.
pub struct ForwardTrace {
    pub pre_activations: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
}

impl NetModel {
    /// Fan-in-scaled uniform initialization, biases zero.
    pub fn init(config: &NetConfig) -> Result<Self> {
        if config.layer_widths.len() < 3 {
            return Err(Error::config("network needs at least one hidden layer"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut layers = Vec::new();
        for pair in config.layer_widths.windows(2) {
            let (in_dim, out_dim) = (pair[0], pair[1]);
            let bound = 1.0 / (in_dim as f64).sqrt();
            let mut layer = Layer::zeros(in_dim, out_dim);
            for w in layer.weights.iter_mut() {
                *w = rng.gen_range(-bound..bound);
            }
            layers.push(layer);
        }
        Ok(NetModel { layers, activation: config.activation })
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn forward_trace(&self, inputs: &[f64]) -> ForwardTrace {
        let last = self.layers.len() - 1;
        let mut activations = vec![inputs.to_vec()];
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.forward(activations.last().unwrap(), &mut z);
            let a = if k < last {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            } else {
                z.clone()
            };
            pre_activations.push(z);
            activations.push(a);
        }
        ForwardTrace { pre_activations, activations }
    }

    pub fn logits(&self, inputs: &[f64]) -> Result<[f64; 2]> {
        if inputs.len() != self.input_len() {
            return Err(Error::input(format!(
                "expected {} inputs, got {}",
                self.input_len(),
                inputs.len()
            )));
        }
        let trace = self.forward_trace(inputs);
        let out = trace.pre_activations.last().unwrap();
        Ok([out[0], out[1]])
    }

    /// Argmax of the logits; an exact tie goes to class 0.
    pub fn predict(&self, inputs: &[f64]) -> Result<u8> {
        let [z0, z1] = self.logits(inputs)?;
        Ok(u8::from(z1 > z0))
    }

    /// Exact derivative of the target logit with respect to each input.
    pub fn input_gradient(&self, inputs: &[f64], target: u8) -> Result<Vec<f64>> {
        if inputs.len() != self.input_len() {
            return Err(Error::input(format!(
                "expected {} inputs, got {}",
                self.input_len(),
                inputs.len()
            )));
        }
        let trace = self.forward_trace(inputs);
        let mut delta = vec![0.0; 2];
        delta[target as usize] = 1.0;
        let mut prev = Vec::new();
        for k in (0..self.layers.len()).rev() {
            self.layers[k].backward_input(&delta, &mut prev);
            if k == 0 {
                return Ok(prev);
            }
            delta = prev
                .iter()
                .zip(&trace.pre_activations[k - 1])
                .map(|(&d, &z)| d * self.activation.derivative(z))
                .collect();
        }
        unreachable!("networks have at least one layer");
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }
}
