//! Reference frame-level detector: a logistic model or small tanh MLP over
//! feature vectors, trained with mini-batch Adam on BCE-with-logits and
//! early-stopped on validation AUC.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::age::Label;
use crate::error::{Error, Result};
use crate::evaluation;
use crate::rng::{self, Streams};

pub const CHECKPOINT_MAGIC: &str = "agefair-model v1";

/// Minimum AUC gain that counts as an improvement for early stopping.
pub const MIN_AUC_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub frame_id: String,
    pub features: Vec<f64>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Apply weight decay as `p *= 1 - lr * wd` instead of adding `wd * p`
    /// to the gradient.
    pub decoupled_weight_decay: bool,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub hidden_layers: Vec<usize>,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            weight_decay: 1e-6,
            decoupled_weight_decay: true,
            batch_size: 32,
            max_epochs: 20,
            patience: 3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            hidden_layers: Vec::new(),
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.weight_decay.is_nan() || self.weight_decay < 0.0 {
            return Err(Error::Config("weight_decay must be non-negative".into()));
        }
        if self.beta1 >= 1.0 || self.beta2 >= 1.0 {
            return Err(Error::Config("Adam betas must be below 1".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Config("batch_size, max_epochs and patience must be positive".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::Config("patience must not exceed max_epochs".into()));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config("hidden layers must have at least one unit".into()));
        }
        Ok(())
    }
}

/// `max(z, 0) - z y + ln(1 + e^{-|z|})`.
pub fn bce_with_logits(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fully connected network with tanh hidden units and one output logit.
///
/// Parameters are stored flat, layer by layer: an `out x in` row-major
/// weight block followed by `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    dims: Vec<usize>,
    params: Vec<f64>,
}

impl Network {
    pub fn zeros(input_dim: usize, hidden: &[usize]) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let n = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Self { dims, params: vec![0.0; n] }
    }

    /// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn init<R: Rng>(input_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(input_dim, hidden);
        let mut offset = 0;
        for w in net.dims.clone().windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut net.params[offset..offset + fan_in * fan_out] {
                *p = rng.gen_range(-bound..=bound);
            }
            offset += fan_in * fan_out + fan_out;
        }
        net
    }

    pub fn from_parts(dims: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || dims.last() != Some(&1) || dims.contains(&0) {
            return Err(Error::validation("network", format!("invalid layer sizes {dims:?}")));
        }
        let n: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        if params.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameter".into()));
        }
        Ok(Self { dims, params })
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Activations of every layer; the last holds the single logit.
    fn forward_all(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        let mut offset = 0;
        let layers = self.dims.len() - 1;
        for l in 0..layers {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let w = &self.params[offset..offset + fan_in * fan_out];
            let b = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let input = &acts[l];
            let out: Vec<f64> = (0..fan_out)
                .map(|o| {
                    let z = b[o] + w[o * fan_in..(o + 1) * fan_in].iter().zip(input).map(|(a, c)| a * c).sum::<f64>();
                    if l + 1 < layers {
                        z.tanh()
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
            offset += fan_in * fan_out + fan_out;
        }
        acts
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.forward_all(x).last().expect("output layer")[0]
    }

    /// Mean BCE-with-logits over `batch` and its gradient.
    pub fn loss_and_grad(&self, batch: &[&FeatureVector]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        let layers = self.dims.len() - 1;
        let offsets: Vec<usize> = self
            .dims
            .windows(2)
            .scan(0, |acc, w| {
                let o = *acc;
                *acc += w[0] * w[1] + w[1];
                Some(o)
            })
            .collect();
        for fv in batch {
            let acts = self.forward_all(&fv.features);
            let z = acts[layers][0];
            let y = fv.label.target();
            loss += bce_with_logits(z, y);
            let mut delta = vec![(sigmoid(z) - y) * scale];
            for l in (0..layers).rev() {
                let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
                let off = offsets[l];
                let input = &acts[l];
                for o in 0..fan_out {
                    let d = delta[o];
                    for i in 0..fan_in {
                        grad[off + o * fan_in + i] += d * input[i];
                    }
                    grad[off + fan_in * fan_out + o] += d;
                }
                if l > 0 {
                    let w = &self.params[off..off + fan_in * fan_out];
                    delta = (0..fan_in)
                        .map(|i| {
                            let back: f64 = (0..fan_out).map(|o| w[o * fan_in + i] * delta[o]).sum();
                            back * (1.0 - input[i] * input[i])
                        })
                        .collect();
                }
            }
        }
        (loss * scale, grad)
    }

    pub fn mean_loss(&self, data: &[FeatureVector]) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        data.iter()
            .map(|fv| bce_with_logits(self.logit(&fv.features), fv.label.target()))
            .sum::<f64>()
            / data.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], step: 0 }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, hp: &HyperParams) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), actual: grads.len() });
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!(
            "gradient component {i} = {} at step {}",
            grads[i],
            state.step + 1
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - hp.beta1.powi(t);
    let bc2 = 1.0 - hp.beta2.powi(t);
    let decay = 1.0 - hp.learning_rate * hp.weight_decay;
    for i in 0..params.len() {
        let g = if hp.decoupled_weight_decay {
            grads[i]
        } else {
            grads[i] + hp.weight_decay * params[i]
        };
        state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
        state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        if hp.decoupled_weight_decay {
            params[i] *= decay;
        }
        params[i] -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.epsilon);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Weights from the best validation epoch.
    pub network: Network,
    pub hyper_params: HyperParams,
    pub history: Vec<EpochRecord>,
    pub stopped_epoch: usize,
    pub best_epoch: usize,
}

fn check_dataset(name: &str, data: &[FeatureVector], dim: Option<usize>) -> Result<usize> {
    let first = data
        .first()
        .ok_or_else(|| Error::validation(name, "dataset is empty"))?;
    let dim = dim.unwrap_or(first.features.len());
    for fv in data {
        if fv.features.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: fv.features.len() });
        }
        if fv.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature of {}", fv.frame_id)));
        }
    }
    Ok(dim)
}

pub fn validation_auc(network: &Network, val: &[FeatureVector]) -> Result<f64> {
    let scores: Vec<f64> = val.iter().map(|fv| network.logit(&fv.features)).collect();
    let labels: Vec<Label> = val.iter().map(|fv| fv.label).collect();
    evaluation::auc(&scores, &labels).ok_or_else(|| Error::Undefined("validation AUC needs both classes".into()))
}

/// Mini-batch Adam with per-epoch validation AUC and early stopping.
pub fn train(train_set: &[FeatureVector], val_set: &[FeatureVector], hp: &HyperParams) -> Result<TrainedModel> {
    hp.validate()?;
    let dim = check_dataset("training set", train_set, None)?;
    check_dataset("validation set", val_set, Some(dim))?;
    let has = |l: Label| val_set.iter().any(|fv| fv.label == l);
    if !(has(Label::Real) && has(Label::Fake)) {
        return Err(Error::Undefined(
            "validation set contains a single class; AUC is undefined".into(),
        ));
    }

    let streams = Streams::new(hp.seed);
    let mut init_rng = streams.stream(rng::DETECTOR_INIT);
    let mut shuffle_rng = streams.stream(rng::DETECTOR_SHUFFLE);
    let mut net = Network::init(dim, &hp.hidden_layers, &mut init_rng);
    let mut state = AdamState::new(net.params.len());
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut best = (f64::NEG_INFINITY, net.clone(), 0usize);
    let mut history = Vec::new();
    let mut stale = 0;
    for epoch in 1..=hp.max_epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(hp.batch_size) {
            let batch: Vec<&FeatureVector> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (_, grad) = net.loss_and_grad(&batch);
            adam_step(&mut net.params, &grad, &mut state, hp)?;
        }
        let val_auc = validation_auc(&net, val_set)?;
        history.push(EpochRecord { epoch, train_loss: net.mean_loss(train_set), val_auc });
        if val_auc > best.0 + MIN_AUC_DELTA {
            best = (val_auc, net.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= hp.patience {
                break;
            }
        }
    }
    Ok(TrainedModel {
        network: best.1,
        hyper_params: hp.clone(),
        stopped_epoch: history.len(),
        best_epoch: best.2,
        history,
    })
}

/// Raw logit; higher means more likely fake.
pub fn predict(model: &TrainedModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.network.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.network.input_dim(),
            actual: features.len(),
        });
    }
    Ok(model.network.logit(features))
}

impl TrainedModel {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_auc\n");
        for e in &self.history {
            let _ = writeln!(out, "{},{},{}", e.epoch, e.train_loss, e.val_auc);
        }
        out
    }

    /// Line-oriented text checkpoint; floats use shortest round-trip form.
    pub fn to_checkpoint(&self) -> String {
        let hp = &self.hyper_params;
        let join = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
        let _ = writeln!(out, "dims {}", join(self.network.dims()));
        let _ = writeln!(out, "hidden_activation tanh");
        let _ = writeln!(out, "learning_rate {}", hp.learning_rate);
        let _ = writeln!(out, "weight_decay {}", hp.weight_decay);
        let _ = writeln!(out, "decoupled_weight_decay {}", hp.decoupled_weight_decay);
        let _ = writeln!(out, "batch_size {}", hp.batch_size);
        let _ = writeln!(out, "max_epochs {}", hp.max_epochs);
        let _ = writeln!(out, "patience {}", hp.patience);
        let _ = writeln!(out, "beta1 {}", hp.beta1);
        let _ = writeln!(out, "beta2 {}", hp.beta2);
        let _ = writeln!(out, "epsilon {}", hp.epsilon);
        let _ = writeln!(out, "seed {}", hp.seed);
        let _ = writeln!(out, "stopped_epoch {}", self.stopped_epoch);
        let _ = writeln!(out, "best_epoch {}", self.best_epoch);
        let _ = writeln!(out, "params {}", self.network.params().len());
        for p in self.network.params() {
            let _ = writeln!(out, "{p}");
        }
        out
    }

    /// Restores weights and hyperparameters; the epoch history is not
    /// stored in checkpoints.
    pub fn from_checkpoint(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, msg: &str| Error::parse(path, line + 1, msg.to_string());
        match lines.next() {
            Some((_, CHECKPOINT_MAGIC)) => {}
            _ => return Err(bad(0, "not an agefair model checkpoint")),
        }
        let mut hp = HyperParams::default();
        let mut dims = Vec::new();
        let (mut stopped_epoch, mut best_epoch) = (0, 0);
        let mut n_params = None;
        for (i, line) in lines.by_ref() {
            let (key, value) = line.split_once(' ').ok_or_else(|| bad(i, "expected `key value`"))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(i, "bad number"));
            let int = |v: &str| v.parse::<usize>().map_err(|_| bad(i, "bad integer"));
            match key {
                "dims" => dims = value.split_whitespace().map(int).collect::<Result<_>>()?,
                "hidden_activation" if value == "tanh" => {}
                "learning_rate" => hp.learning_rate = num(value)?,
                "weight_decay" => hp.weight_decay = num(value)?,
                "decoupled_weight_decay" => hp.decoupled_weight_decay = value == "true",
                "batch_size" => hp.batch_size = int(value)?,
                "max_epochs" => hp.max_epochs = int(value)?,
                "patience" => hp.patience = int(value)?,
                "beta1" => hp.beta1 = num(value)?,
                "beta2" => hp.beta2 = num(value)?,
                "epsilon" => hp.epsilon = num(value)?,
                "seed" => hp.seed = value.parse().map_err(|_| bad(i, "bad seed"))?,
                "stopped_epoch" => stopped_epoch = int(value)?,
                "best_epoch" => best_epoch = int(value)?,
                "params" => {
                    n_params = Some(int(value)?);
                    break;
                }
                _ => return Err(bad(i, &format!("unknown key {key:?}"))),
            }
        }
        let n = n_params.ok_or_else(|| bad(0, "missing params section"))?;
        let params = lines
            .take(n)
            .map(|(i, l)| l.trim().parse::<f64>().map_err(|_| bad(i, "bad parameter")))
            .collect::<Result<Vec<_>>>()?;
        if params.len() != n {
            return Err(bad(0, "truncated params section"));
        }
        hp.hidden_layers = dims.get(1..dims.len().saturating_sub(1)).unwrap_or(&[]).to_vec();
        Ok(Self {
            network: Network::from_parts(dims, params)?,
            hyper_params: hp,
            history: Vec::new(),
            stopped_epoch,
            best_epoch,
        })
    }
}
