//! Mini-batch training with Adam, a seeded validation split, and
//! best-validation checkpointing.

use super::losses::{kl_loss, kl_loss_grad, mae_loss, mae_loss_grad, LossKind};
use super::net::{Grads, Network};
use super::tensor::{Scalar, Tensor};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            validation_fraction: 0.10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be finite and nonnegative, got {}",
                self.learning_rate
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "validation fraction must lie in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// In-memory training pairs: flattened inputs and targets, one row each
/// per sample.
#[derive(Debug, Clone)]
pub struct TrainingSet<T> {
    input_n: usize,
    target_len: usize,
    inputs: Vec<T>,
    targets: Vec<T>,
    count: usize,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn new(input_n: usize, target_len: usize, inputs: Vec<T>, targets: Vec<T>) -> Result<Self> {
        let in_len = input_n * input_n;
        if in_len == 0 || inputs.len() % in_len != 0 {
            return Err(Error::ShapeMismatch {
                expected: format!("multiple of {in_len} input values"),
                actual: format!("{}", inputs.len()),
            });
        }
        let count = inputs.len() / in_len;
        if targets.len() != count * target_len {
            return Err(Error::ShapeMismatch {
                expected: format!("{} target values", count * target_len),
                actual: format!("{}", targets.len()),
            });
        }
        if count == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { input_n, target_len, inputs, targets, count })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn input_n(&self) -> usize {
        self.input_n
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn input_row(&self, i: usize) -> &[T] {
        let len = self.input_n * self.input_n;
        &self.inputs[i * len..(i + 1) * len]
    }

    pub fn target_row(&self, i: usize) -> &[T] {
        &self.targets[i * self.target_len..(i + 1) * self.target_len]
    }
}

/// Loss values recorded after each epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Outcome of a training run. `history` supports divergence inspection;
/// the returned network carries the parameters of the best validation
/// epoch.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub history: Vec<EpochLoss>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    step: u32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    fn new(lr: f64, param_lens: &[usize]) -> Self {
        Self {
            lr: T::from_f64(lr),
            beta1: T::from_f64(0.9),
            beta2: T::from_f64(0.999),
            eps: T::from_f64(1e-8),
            step: 0,
            m: param_lens.iter().map(|&l| vec![T::zero(); l]).collect(),
            v: param_lens.iter().map(|&l| vec![T::zero(); l]).collect(),
        }
    }

    fn apply(&mut self, params: &mut [&mut Vec<T>], grads: &[&[T]]) {
        self.step += 1;
        let one = T::one();
        let bc1 = one - self.beta1.powi(self.step as i32);
        let bc2 = one - self.beta2.powi(self.step as i32);
        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = self.beta1 * m[i] + (one - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (one - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param[i] = param[i] - self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

fn batch_tensors<T: Scalar>(
    data: &TrainingSet<T>,
    indices: &[usize],
) -> (Tensor<T>, Vec<T>) {
    let n = data.input_n();
    let in_len = n * n;
    let mut inputs = Vec::with_capacity(indices.len() * in_len);
    let mut targets = Vec::with_capacity(indices.len() * data.target_len());
    for &i in indices {
        inputs.extend_from_slice(data.input_row(i));
        targets.extend_from_slice(data.target_row(i));
    }
    let x = Tensor::from_vec(&[indices.len(), 1, n, n], inputs).unwrap();
    (x, targets)
}

fn loss_value<T: Scalar>(kind: LossKind, pred: &[T], target: &[T]) -> Result<T> {
    match kind {
        LossKind::Kl => kl_loss(pred, target),
        LossKind::Mae => mae_loss(pred, target),
    }
}

fn loss_grad<T: Scalar>(kind: LossKind, pred: &[T], target: &[T], scale: T, out: &mut [T]) {
    match kind {
        LossKind::Kl => kl_loss_grad(pred, target, scale, out),
        LossKind::Mae => mae_loss_grad(pred, target, scale, out),
    }
}

/// Mean loss over a set of sample indices, evaluated in inference mode.
fn evaluate_loss<T: Scalar>(
    net: &Network<T>,
    data: &TrainingSet<T>,
    indices: &[usize],
    kind: LossKind,
    batch_size: usize,
) -> Result<f64> {
    if indices.is_empty() {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    for chunk in indices.chunks(batch_size) {
        let (x, targets) = batch_tensors(data, chunk);
        let y = net.forward(&x)?;
        let out_len = y.row_len();
        for (b, _) in chunk.iter().enumerate() {
            let pred = y.row(b);
            let target = &targets[b * out_len..(b + 1) * out_len];
            total += loss_value(kind, pred, target)?.as_f64();
        }
    }
    Ok(total / indices.len() as f64)
}

/// Train `net` on `data`, returning the per-epoch loss history.
///
/// Samples are split once by a seeded shuffle, holding out
/// `floor(validation_fraction * N)` samples that never contribute
/// gradients; the remaining samples are reshuffled every epoch. The epoch
/// train loss is the sample-weighted mean of the mini-batch losses; the
/// validation loss is evaluated after the epoch's updates. On return the
/// network holds the parameters from the epoch with the lowest validation
/// loss. Non-finite losses abort with an error.
pub fn train<T: Scalar>(
    net: &mut Network<T>,
    data: &TrainingSet<T>,
    kind: LossKind,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.target_len() != net.output_len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} target values per sample", net.output_len()),
            actual: format!("{}", data.target_len()),
        });
    }
    if kind == LossKind::Kl && !net.output_is_distribution() {
        return Err(Error::InvalidConfig(
            "KL loss requires a distribution (softmax) output".into(),
        ));
    }
    if data.input_n() != net.input_n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0} inputs", net.input_n()),
            actual: format!("{0}x{0}", data.input_n()),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let val_count = (cfg.validation_fraction * data.len() as f64).floor() as usize;
    let (val_idx, train_idx) = order.split_at(val_count);
    let val_idx = val_idx.to_vec();
    let mut train_idx = train_idx.to_vec();
    if train_idx.is_empty() {
        return Err(Error::InvalidConfig(
            "validation split leaves no training samples".into(),
        ));
    }

    let param_lens: Vec<usize> = net.param_slices().iter().map(|p| p.len()).collect();
    let mut adam = Adam::<T>::new(cfg.learning_rate, &param_lens);

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_params: Option<Vec<Vec<T>>> = None;

    for epoch in 0..cfg.epochs {
        train_idx.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in train_idx.chunks(cfg.batch_size) {
            let (x, targets) = batch_tensors(data, chunk);
            let stack = net.forward_cached(&x)?;
            let y = stack.last().unwrap();
            let out_len = y.row_len();

            let mut grad_out = Tensor::zeros(y.shape());
            let scale = T::from_f64(1.0 / chunk.len() as f64);
            for b in 0..chunk.len() {
                let pred = y.row(b);
                let target = &targets[b * out_len..(b + 1) * out_len];
                epoch_loss += loss_value(kind, pred, target)?.as_f64();
                loss_grad(kind, pred, target, scale, grad_out.row_mut(b));
            }

            let mut grads: Grads<T> = net.zero_grads();
            net.backward(&stack, grad_out, &mut grads);
            let flat_grads: Vec<&[T]> =
                grads.iter().flat_map(|l| l.iter().map(|g| g.as_slice())).collect();
            let mut params = net.param_slices_mut();
            adam.apply(&mut params, &flat_grads);
        }
        let train_loss = epoch_loss / train_idx.len() as f64;
        let val_loss = if val_idx.is_empty() {
            // Degenerate split on tiny datasets: report the train loss so
            // checkpointing still has a signal.
            train_loss
        } else {
            evaluate_loss(net, data, &val_idx, kind, cfg.batch_size)?
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.push(EpochLoss { epoch, train_loss, val_loss });
        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = epoch;
            best_params = Some(net.param_slices().iter().map(|p| p.to_vec()).collect());
        }
    }

    if let Some(best) = best_params {
        for (param, saved) in net.param_slices_mut().into_iter().zip(best) {
            param.copy_from_slice(&saved);
        }
    }
    Ok(TrainReport { history, best_epoch, best_val_loss: best_val })
}
