//! Fully connected network with a softmax output, trained by mini-batch
//! gradient descent with momentum on mean cross-entropy.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::activation::{log_sum_exp, softmax_in_place, Activation};
use crate::error::{EmgError, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::{child_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![32],
            activation: Activation::Tanh,
            epochs: 200,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 16,
            seed: 42,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(EmgError::invalid("hidden layers must be non-empty"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(EmgError::invalid("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(EmgError::invalid("momentum must be in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(EmgError::invalid("batch size must be positive"));
        }
        Ok(())
    }
}

/// One affine map `z = W a + b`, `W` is out×in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros_like(&self) -> Layer {
        Layer {
            weights: Matrix::zeros(self.weights.rows(), self.weights.cols()),
            bias: vec![0.0; self.bias.len()],
        }
    }

    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .row_iter()
                .zip(&self.bias)
                .map(|(w, b)| dot(w, input) + b),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub hidden_activation: Activation,
    pub seed: u64,
}

/// Xavier-uniform weights, zero biases.
pub fn mlp_init(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<MlpModel> {
    if layer_sizes.len() < 2 {
        return Err(EmgError::invalid("an MLP needs at least input and output layers"));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(EmgError::invalid("layer widths must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let layers = layer_sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..=bound))
                .collect();
            Layer {
                weights: Matrix::from_vec(fan_out, fan_in, data).expect("sized"),
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(MlpModel {
        layer_sizes: layer_sizes.to_vec(),
        layers,
        hidden_activation: activation,
        seed,
    })
}

/// Per-layer pre-activations and activations of one forward pass.
struct Trace {
    /// activations[0] is the input; last is the softmax output.
    activations: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    fn trace(&self, x: &[f64]) -> Result<Trace> {
        if x.len() != self.input_dim() {
            return Err(EmgError::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let mut activations = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.affine(activations.last().expect("input present"), &mut z);
            let a = if i == last {
                let mut p = z.clone();
                softmax_in_place(&mut p);
                p
            } else {
                z.iter().map(|&v| self.hidden_activation.apply(v)).collect()
            };
            pre.push(z);
            activations.push(a);
        }
        Ok(Trace { activations, pre })
    }

    /// Output-layer net input, before softmax.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut t = self.trace(x)?;
        Ok(t.pre.pop().expect("at least one layer"))
    }

    /// Class probabilities.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let t = self.trace(x)?;
        let p = t.activations.last().expect("output present").clone();
        if p.iter().any(|v| !v.is_finite()) {
            return Err(EmgError::Numerical("non-finite activation in forward pass".into()));
        }
        Ok(p)
    }

    /// Argmax class, lowest index on exact ties.
    pub fn predict_one(&self, x: &[f64]) -> Result<usize> {
        let p = self.forward(x)?;
        Ok(argmax(&p))
    }

    /// Mean cross-entropy over the given rows.
    pub fn loss(&self, x: &Matrix, y: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (row, &label) in x.row_iter().zip(y) {
            let z = self.logits(row)?;
            total += log_sum_exp(&z) - z[label];
        }
        Ok(total / y.len() as f64)
    }

    /// Mean cross-entropy and its gradient over a subset of rows.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[usize], rows: &[usize]) -> Result<(f64, Vec<Layer>)> {
        let mut grads: Vec<Layer> = self.layers.iter().map(Layer::zeros_like).collect();
        let mut total = 0.0;
        let n_out = self.n_outputs();
        for &r in rows {
            let label = y[r];
            if label >= n_out {
                return Err(EmgError::invalid(format!("label {label} outside 0..{n_out}")));
            }
            let t = self.trace(x.row(r))?;
            let z = t.pre.last().expect("output layer");
            total += log_sum_exp(z) - z[label];

            // softmax + cross-entropy: dL/dz = p − onehot
            let mut delta = t.activations.last().expect("output").clone();
            delta[label] -= 1.0;
            for li in (0..self.layers.len()).rev() {
                let input = &t.activations[li];
                let g = &mut grads[li];
                g.weights.rank1_update(1.0, &delta, input);
                for (gb, d) in g.bias.iter_mut().zip(&delta) {
                    *gb += d;
                }
                if li == 0 {
                    break;
                }
                let w = &self.layers[li].weights;
                let mut next = vec![0.0; w.cols()];
                for (j, &d) in delta.iter().enumerate() {
                    for (n, &wv) in next.iter_mut().zip(w.row(j)) {
                        *n += d * wv;
                    }
                }
                for (n, &zp) in next.iter_mut().zip(&t.pre[li - 1]) {
                    *n *= self.hidden_activation.derivative(zp);
                }
                delta = next;
            }
        }
        let scale = 1.0 / rows.len() as f64;
        for g in &mut grads {
            g.weights.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
            g.bias.iter_mut().for_each(|v| *v *= scale);
        }
        Ok((total * scale, grads))
    }

    /// All weights then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(EmgError::DimensionMismatch {
                expected: self.n_params(),
                actual: params.len(),
            });
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.as_slice().len();
            l.weights.as_mut_slice().copy_from_slice(&params[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[off..off + nb]);
            off += nb;
        }
        Ok(())
    }
}

/// Flattens gradients in the same order as [`MlpModel::params`].
pub fn flatten_layers(layers: &[Layer]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(l.weights.as_slice());
        out.extend_from_slice(&l.bias);
    }
    out
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Trained network plus the full-training-set loss before training and
/// after every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpTraining {
    pub model: MlpModel,
    pub loss_history: Vec<f64>,
}

pub fn mlp_train(x: &Matrix, y: &[usize], n_classes: usize, cfg: &MlpConfig) -> Result<MlpTraining> {
    cfg.validate()?;
    if x.rows() == 0 {
        return Err(EmgError::invalid("empty training set"));
    }
    if x.rows() != y.len() {
        return Err(EmgError::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
        return Err(EmgError::invalid(format!("label {bad} outside 0..{n_classes}")));
    }
    let mut sizes = vec![x.cols()];
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(n_classes);
    let mut model = mlp_init(&sizes, cfg.activation, child_seed(cfg.seed, 0))?;
    model.seed = cfg.seed;
    let mut shuffle_rng = rng_from_seed(child_seed(cfg.seed, 1));

    let initial = model.loss(x, y)?;
    if !initial.is_finite() {
        return Err(EmgError::Diverged { epoch: 0 });
    }
    let mut loss_history = vec![initial];
    let mut velocity = vec![0.0; model.n_params()];
    let mut params = model.params();
    let mut order: Vec<usize> = (0..x.rows()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(cfg.batch_size) {
            let (_, grads) = model.loss_and_gradient(x, y, batch)?;
            for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(flatten_layers(&grads)) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
                *p += *v;
            }
            model.set_params(&params)?;
        }
        let loss = model.loss(x, y)?;
        if !loss.is_finite() {
            return Err(EmgError::Diverged { epoch });
        }
        loss_history.push(loss);
    }
    Ok(MlpTraining {
        model,
        loss_history,
    })
}

pub fn loss_history_csv(history: &[f64]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("epoch,loss\n");
    for (i, l) in history.iter().enumerate() {
        let _ = writeln!(out, "{i},{l}");
    }
    out
}
