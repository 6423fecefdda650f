//! One-hidden-layer sigmoid network trained by per-sample backpropagation on
//! a sum-of-squares loss.

use nalgebra::DMatrix;
use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::error::{Error, Result};

pub const INIT_VARIANCE_RANGE: (f64, f64) = (0.1, 0.5);
pub const LEARNING_RATE_RANGE: (f64, f64) = (0.1, 0.3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HiddenRule {
    /// ceil((inputs + outputs) / 2)
    SumOver2,
    /// ceil((inputs + outputs) / 3)
    SumOver3,
    Explicit(usize),
}

impl HiddenRule {
    pub fn hidden_units(self, n_inputs: usize, n_outputs: usize) -> usize {
        match self {
            HiddenRule::SumOver2 => (n_inputs + n_outputs).div_ceil(2),
            HiddenRule::SumOver3 => (n_inputs + n_outputs).div_ceil(3),
            HiddenRule::Explicit(n) => n,
        }
    }
}

impl std::fmt::Display for HiddenRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HiddenRule::SumOver2 => f.write_str("sum/2"),
            HiddenRule::SumOver3 => f.write_str("sum/3"),
            HiddenRule::Explicit(n) => write!(f, "{n}"),
        }
    }
}

impl std::str::FromStr for HiddenRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum/2" => Ok(HiddenRule::SumOver2),
            "sum/3" => Ok(HiddenRule::SumOver3),
            n => n
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .map(HiddenRule::Explicit)
                .ok_or_else(|| Error::InvalidParameter(format!("hidden rule `{s}` is not sum/2, sum/3 or a count"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    /// Draw each epoch class-balanced with replacement instead of a shuffle.
    pub balanced: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, max_epochs: 200, patience: 10, balanced: false }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Weights are row-major: `w1[h * n_inputs + i]`, `w2[o * n_hidden + h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub n_outputs: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub seed: u64,
    pub init_variance: f64,
}

/// Gradient of the per-sample loss, laid out like the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub valid: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Mlp,
    /// Entry 0 is the untrained network.
    pub curve: Vec<EpochLoss>,
    pub best_epoch: usize,
}

/// Inputs with one-hot targets.
pub struct Dataset<'a> {
    pub x: &'a DMatrix<f64>,
    pub y: &'a [usize],
}

impl Mlp {
    pub fn new(n_inputs: usize, n_outputs: usize, rule: HiddenRule, seed: u64, init_variance: f64) -> Result<Self> {
        let (lo, hi) = INIT_VARIANCE_RANGE;
        if !(lo..=hi).contains(&init_variance) {
            return Err(Error::InvalidParameter(format!("init variance {init_variance} outside [{lo}, {hi}]")));
        }
        let n_hidden = rule.hidden_units(n_inputs, n_outputs);
        if n_inputs == 0 || n_outputs == 0 || n_hidden == 0 {
            return Err(Error::InvalidParameter(format!(
                "network sizes must be positive, got {n_inputs}-{n_hidden}-{n_outputs}"
            )));
        }
        // Var(U(-a, a)) = a^2 / 3.
        let a = (3.0 * init_variance).sqrt();
        let dist = Uniform::new_inclusive(-a, a).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1 = (0..n_hidden * n_inputs).map(|_| dist.sample(&mut rng)).collect();
        let w2 = (0..n_outputs * n_hidden).map(|_| dist.sample(&mut rng)).collect();
        Ok(Self {
            n_inputs,
            n_hidden,
            n_outputs,
            w1,
            b1: vec![0.0; n_hidden],
            w2,
            b2: vec![0.0; n_outputs],
            seed,
            init_variance,
        })
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_hidden)
            .map(|h| {
                let w = &self.w1[h * self.n_inputs..(h + 1) * self.n_inputs];
                sigmoid(self.b1[h] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            })
            .collect()
    }

    fn output(&self, hidden: &[f64]) -> Vec<f64> {
        (0..self.n_outputs)
            .map(|o| {
                let w = &self.w2[o * self.n_hidden..(o + 1) * self.n_hidden];
                sigmoid(self.b2[o] + w.iter().zip(hidden).map(|(a, b)| a * b).sum::<f64>())
            })
            .collect()
    }

    /// Sigmoid outputs, each in (0, 1).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_inputs {
            return Err(Error::DimensionMismatch { expected: self.n_inputs, got: x.len() });
        }
        Ok(self.output(&self.hidden(x)))
    }

    /// Per-sample loss: half the squared error against a one-hot target.
    pub fn loss(&self, x: &[f64], target: usize) -> Result<f64> {
        let o = self.forward(x)?;
        Ok(0.5 * o.iter().enumerate().map(|(k, v)| (v - f64::from(k == target)).powi(2)).sum::<f64>())
    }

    pub fn gradient(&self, x: &[f64], target: usize) -> Result<Gradient> {
        if x.len() != self.n_inputs {
            return Err(Error::DimensionMismatch { expected: self.n_inputs, got: x.len() });
        }
        let h = self.hidden(x);
        let o = self.output(&h);
        let delta_o: Vec<f64> = o
            .iter()
            .enumerate()
            .map(|(k, &v)| (v - f64::from(k == target)) * v * (1.0 - v))
            .collect();
        let delta_h: Vec<f64> = (0..self.n_hidden)
            .map(|j| {
                let back: f64 = (0..self.n_outputs).map(|k| self.w2[k * self.n_hidden + j] * delta_o[k]).sum();
                back * h[j] * (1.0 - h[j])
            })
            .collect();
        let mut w2 = vec![0.0; self.w2.len()];
        for k in 0..self.n_outputs {
            for j in 0..self.n_hidden {
                w2[k * self.n_hidden + j] = delta_o[k] * h[j];
            }
        }
        let mut w1 = vec![0.0; self.w1.len()];
        for j in 0..self.n_hidden {
            for i in 0..self.n_inputs {
                w1[j * self.n_inputs + i] = delta_h[j] * x[i];
            }
        }
        Ok(Gradient { w1, b1: delta_h, w2, b2: delta_o })
    }

    fn step(&mut self, g: &Gradient, eta: f64) {
        for (w, d) in self.w1.iter_mut().zip(&g.w1) {
            *w -= eta * d;
        }
        for (w, d) in self.b1.iter_mut().zip(&g.b1) {
            *w -= eta * d;
        }
        for (w, d) in self.w2.iter_mut().zip(&g.w2) {
            *w -= eta * d;
        }
        for (w, d) in self.b2.iter_mut().zip(&g.b2) {
            *w -= eta * d;
        }
    }

    /// Mean per-sample loss over a dataset.
    pub fn mean_loss(&self, data: &Dataset<'_>) -> Result<f64> {
        let n = data.x.nrows();
        if n == 0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let mut row = vec![0.0; data.x.ncols()];
        for i in 0..n {
            row.iter_mut().enumerate().for_each(|(j, v)| *v = data.x[(i, j)]);
            total += self.loss(&row, data.y[i])?;
        }
        Ok(total / n as f64)
    }
}

fn check_data(m: &Mlp, data: &Dataset<'_>, what: &str) -> Result<()> {
    if data.x.nrows() != data.y.len() {
        return Err(Error::DimensionMismatch { expected: data.x.nrows(), got: data.y.len() });
    }
    if data.x.nrows() > 0 && data.x.ncols() != m.n_inputs {
        return Err(Error::DimensionMismatch { expected: m.n_inputs, got: data.x.ncols() });
    }
    if let Some(&c) = data.y.iter().find(|&&c| c >= m.n_outputs) {
        return Err(Error::InvalidInput(format!("{what} label {c} out of range for {} outputs", m.n_outputs)));
    }
    Ok(())
}

fn epoch_order(y: &[usize], n_outputs: usize, seed: u64, epoch: usize, balanced: bool) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    let n = y.len();
    if !balanced {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        return order;
    }
    let by_class: Vec<Vec<usize>> = (0..n_outputs).map(|c| (0..n).filter(|&i| y[i] == c).collect()).collect();
    let present: Vec<&Vec<usize>> = by_class.iter().filter(|v| !v.is_empty()).collect();
    let per_class = n.div_ceil(present.len());
    let mut order = Vec::with_capacity(per_class * present.len());
    for members in present {
        let pick = Uniform::new(0, members.len()).expect("non-empty class");
        order.extend((0..per_class).map(|_| members[pick.sample(&mut rng)]));
    }
    order.shuffle(&mut rng);
    order
}

/// Train by per-sample gradient steps. Validation loss picks the returned
/// snapshot; training stops after `patience` epochs without improvement.
/// An empty validation set falls back to the training loss.
pub fn mlp_train(model: &Mlp, train: &Dataset<'_>, valid: &Dataset<'_>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    check_data(model, train, "training")?;
    check_data(model, valid, "validation")?;
    if !(cfg.learning_rate >= 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("learning rate {}", cfg.learning_rate)));
    }
    if train.x.nrows() == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let score = |m: &Mlp, epoch: usize| -> Result<EpochLoss> {
        let t = m.mean_loss(train)?;
        let v = if valid.x.nrows() == 0 { t } else { m.mean_loss(valid)? };
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite loss at epoch {epoch}")));
        }
        Ok(EpochLoss { epoch, train: t, valid: v })
    };

    let mut current = model.clone();
    let mut curve = vec![score(&current, 0)?];
    let mut best = current.clone();
    let mut best_loss = curve[0].valid;
    let mut best_epoch = 0;
    let mut row = vec![0.0; train.x.ncols()];
    for epoch in 1..=cfg.max_epochs {
        for i in epoch_order(train.y, model.n_outputs, model.seed, epoch, cfg.balanced) {
            row.iter_mut().enumerate().for_each(|(j, v)| *v = train.x[(i, j)]);
            let g = current.gradient(&row, train.y[i])?;
            current.step(&g, cfg.learning_rate);
        }
        let e = score(&current, epoch)?;
        curve.push(e);
        if e.valid < best_loss {
            best_loss = e.valid;
            best = current.clone();
            best_epoch = epoch;
        } else if epoch - best_epoch >= cfg.patience {
            break;
        }
    }
    Ok(TrainOutcome { model: best, curve, best_epoch })
}

impl Classifier for Mlp {
    fn dim(&self) -> usize {
        self.n_inputs
    }

    fn n_classes(&self) -> usize {
        self.n_outputs
    }

    /// Raw sigmoid outputs. These do not sum to one; see [`Classifier::posterior`].
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward(x)
    }
}
