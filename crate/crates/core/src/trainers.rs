//! Task models and the training protocols compared by the benchmark.
//!
//! The downstream task is classification: a small dense network trained
//! with softmax cross-entropy. Four protocols differ only in which samples
//! they see and how much each sample counts:
//!
//! * **everything** — all history, every sample weighted equally;
//! * **recent** — only the latest step's samples;
//! * **finetune** — pretrain on the past, then warm-start on the latest
//!   step with a fresh optimizer;
//! * **weighted** — all history, each sample scaled by an externally
//!   supplied importance weight (zero-weight samples are dropped).
//!
//! The weighted path is built so that constant weights reproduce
//! `everything` exactly and a current-step indicator reproduces `recent`
//! exactly — bit for bit, not just approximately — which pins down the
//! weighting arithmetic.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::drift::{at_step, DriftSchedule, TimedSample};
use crate::error::{CoreError, Result};
use crate::fmath;
use crate::matrix::Matrix;
use crate::nn::{AdamConfig, AdamState, DenseNet, NetSpec};
use crate::omega::distinct_times;
use crate::seeding::{self, Rng};

/// Hyperparameters for fitting a task model.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTrainConfig {
    /// Hidden layer widths; ReLU activations, linear output.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl Default for TaskTrainConfig {
    fn default() -> Self {
        TaskTrainConfig {
            hidden: alloc::vec![64, 64],
            epochs: 20,
            batch_size: 128,
            lr: 9e-4,
        }
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// A softmax classifier over drift-stream features.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskModel {
    net: DenseNet,
    feature_dim: usize,
    num_classes: usize,
}

impl TaskModel {
    pub fn init(
        feature_dim: usize,
        num_classes: usize,
        hidden: &[usize],
        rng: &mut Rng,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(CoreError::InvalidConfig(
                "TaskModel needs at least two classes".into(),
            ));
        }
        let spec = NetSpec::new(feature_dim, hidden, num_classes);
        Ok(TaskModel {
            net: DenseNet::init(&spec, rng)?,
            feature_dim,
            num_classes,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    /// Class scores (unnormalized logits) for one input.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_dim {
            return Err(CoreError::ShapeMismatch {
                context: "TaskModel::logits",
                expected: (1, self.feature_dim),
                actual: (1, x.len()),
            });
        }
        let m = Matrix::from_vec(1, self.feature_dim, x.to_vec())?;
        let out = self.net.forward(&m)?;
        Ok(out.row(0).to_vec())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.logits(x)?))
    }

    /// Fraction of `samples` whose label the model predicts correctly.
    /// Every sample must be labeled.
    pub fn accuracy(&self, samples: &[TimedSample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(CoreError::Degenerate("TaskModel::accuracy: no samples"));
        }
        let (rows, labels) = assemble(samples, self.feature_dim, self.num_classes)?;
        let out = self.net.forward(&rows)?;
        let mut correct = 0usize;
        for (i, &y) in labels.iter().enumerate() {
            if argmax(out.row(i)) == y {
                correct += 1;
            }
        }
        Ok(correct as f64 / labels.len() as f64)
    }
}

/// Pack samples into a design matrix and a label vector, validating shapes
/// and label range.
fn assemble(
    samples: &[TimedSample],
    feature_dim: usize,
    num_classes: usize,
) -> Result<(Matrix, Vec<usize>)> {
    let mut m = Matrix::zeros(samples.len(), feature_dim);
    let mut labels = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        if s.x.len() != feature_dim {
            return Err(CoreError::ShapeMismatch {
                context: "task training features",
                expected: (1, feature_dim),
                actual: (1, s.x.len()),
            });
        }
        let y = s
            .y
            .ok_or(CoreError::Degenerate("task training needs labeled samples"))?;
        if y >= num_classes {
            return Err(CoreError::IndexOutOfRange {
                context: "task training label",
                index: y,
                limit: num_classes,
            });
        }
        m.row_mut(i).copy_from_slice(&s.x);
        labels.push(y);
    }
    Ok((m, labels))
}

/// One optimizer step on a minibatch. Returns the batch's summed loss and
/// its normalizer (batch size, or total weight when weighting).
fn batch_step(
    model: &mut TaskModel,
    adam: &mut AdamState,
    samples: &[TimedSample],
    ix: &[usize],
    weights: Option<&[f64]>,
) -> Result<(f64, f64)> {
    let batch: Vec<TimedSample> = ix.iter().map(|&i| samples[i].clone()).collect();
    let (rows, labels) = assemble(&batch, model.feature_dim, model.num_classes)?;
    let (logits, cache) = model.net.forward_train(&rows)?;

    // Per-sample scale: 1/B unweighted, w_i / sum(w) weighted. With all
    // weights equal the two coincide exactly, which is what makes the
    // reduction identities in the module docs hold bitwise.
    let denom = match weights {
        None => ix.len() as f64,
        Some(w) => {
            let s: f64 = ix.iter().map(|&i| w[i]).sum();
            if s <= 0.0 {
                return Err(CoreError::Degenerate("batch with zero total weight"));
            }
            s
        }
    };

    let mut loss_sum = 0.0;
    let mut d = Matrix::zeros(logits.rows(), model.num_classes);
    for (r, &y) in labels.iter().enumerate() {
        let z = logits.row(r);
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut expsum = 0.0;
        for &v in z {
            expsum += fmath::exp(v - zmax);
        }
        let log_norm = fmath::ln(expsum) + zmax;
        let wi = match weights {
            None => 1.0,
            Some(w) => w[ix[r]],
        };
        loss_sum += wi * (log_norm - z[y]);
        let scale = wi / denom;
        let dr = d.row_mut(r);
        for (c, &v) in z.iter().enumerate() {
            let p = fmath::exp(v - log_norm);
            dr[c] = scale * (p - if c == y { 1.0 } else { 0.0 });
        }
    }

    let (grads, _) = model.net.backward(&cache, &d, false)?;
    adam.step(&mut model.net, &grads)?;
    model.net.absorb_batch_stats(&cache);
    Ok((loss_sum, denom))
}

/// Fit `model` on `samples` with minibatch Adam, optionally weighting each
/// sample. `weights` must align with `samples` and be nonnegative; callers
/// that want zero-weight samples gone should drop them first (the protocol
/// wrappers below do). Returns the final epoch's mean training loss.
pub fn train_task_model(
    model: &mut TaskModel,
    samples: &[TimedSample],
    weights: Option<&[f64]>,
    cfg: &TaskTrainConfig,
    rng: &mut Rng,
) -> Result<f64> {
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(CoreError::InvalidConfig(
            "epochs and batch_size must be positive".into(),
        ));
    }
    if samples.is_empty() {
        return Err(CoreError::Degenerate("train_task_model: no samples"));
    }
    if let Some(w) = weights {
        if w.len() != samples.len() {
            return Err(CoreError::ShapeMismatch {
                context: "train_task_model weights",
                expected: (samples.len(), 1),
                actual: (w.len(), 1),
            });
        }
        if w.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
            return Err(CoreError::OutOfRange {
                context: "train_task_model weights",
                value: f64::NAN,
            });
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(CoreError::Degenerate("train_task_model: zero total weight"));
        }
    }

    let mut adam = AdamState::new(&model.net, AdamConfig::with_lr(cfg.lr));
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut epoch_loss = 0.0;
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        let mut loss_sum = 0.0;
        let mut denom_sum = 0.0;
        for ix in order.chunks(cfg.batch_size) {
            let (l, d) = batch_step(model, &mut adam, samples, ix, weights)?;
            loss_sum += l;
            denom_sum += d;
        }
        epoch_loss = loss_sum / denom_sum;
    }
    if !epoch_loss.is_finite() {
        return Err(CoreError::NonFinite("train_task_model: final loss"));
    }
    Ok(epoch_loss)
}

fn latest_step(stream: &[TimedSample]) -> Result<usize> {
    distinct_times(stream)
        .last()
        .copied()
        .ok_or(CoreError::Degenerate("empty stream"))
}

/// Train on the full history, every sample weighted equally.
pub fn train_everything(
    stream: &[TimedSample],
    num_classes: usize,
    cfg: &TaskTrainConfig,
    rng: &mut Rng,
) -> Result<TaskModel> {
    let d = feature_dim_of(stream)?;
    let mut model = TaskModel::init(d, num_classes, &cfg.hidden, rng)?;
    train_task_model(&mut model, stream, None, cfg, rng)?;
    Ok(model)
}

/// Train only on the latest step's samples.
pub fn train_recent(
    stream: &[TimedSample],
    num_classes: usize,
    cfg: &TaskTrainConfig,
    rng: &mut Rng,
) -> Result<TaskModel> {
    let d = feature_dim_of(stream)?;
    let current = at_step(stream, latest_step(stream)?);
    let mut model = TaskModel::init(d, num_classes, &cfg.hidden, rng)?;
    train_task_model(&mut model, current, None, cfg, rng)?;
    Ok(model)
}

/// Pretrain on all strictly-past samples, then continue training the same
/// network on the latest step with a fresh optimizer. With a single-step
/// stream there is no past and this reduces to [`train_recent`].
pub fn train_finetune(
    stream: &[TimedSample],
    num_classes: usize,
    cfg: &TaskTrainConfig,
    rng: &mut Rng,
) -> Result<TaskModel> {
    let d = feature_dim_of(stream)?;
    let t = latest_step(stream)?;
    let split = stream.partition_point(|s| s.t < t);
    let (past, current) = stream.split_at(split);
    let mut model = TaskModel::init(d, num_classes, &cfg.hidden, rng)?;
    if !past.is_empty() {
        train_task_model(&mut model, past, None, cfg, rng)?;
    }
    train_task_model(&mut model, current, None, cfg, rng)?;
    Ok(model)
}

/// Train on the full history with one importance weight per sample
/// (aligned with `stream`). Zero-weight samples are removed before
/// batching, so weights that mask all but the latest step make this the
/// same computation as [`train_recent`].
pub fn train_weighted(
    stream: &[TimedSample],
    weights: &[f64],
    num_classes: usize,
    cfg: &TaskTrainConfig,
    rng: &mut Rng,
) -> Result<TaskModel> {
    if weights.len() != stream.len() {
        return Err(CoreError::ShapeMismatch {
            context: "train_weighted",
            expected: (stream.len(), 1),
            actual: (weights.len(), 1),
        });
    }
    let mut kept = Vec::new();
    let mut kept_w = Vec::new();
    for (s, &w) in stream.iter().zip(weights.iter()) {
        if w != 0.0 {
            kept.push(s.clone());
            kept_w.push(w);
        }
    }
    if kept.is_empty() {
        return Err(CoreError::Degenerate("train_weighted: all weights zero"));
    }
    let d = feature_dim_of(&kept)?;
    let mut model = TaskModel::init(d, num_classes, &cfg.hidden, rng)?;
    train_task_model(&mut model, &kept, Some(&kept_w), cfg, rng)?;
    Ok(model)
}

/// Accuracy on a fresh test set drawn from the distribution at `t_next`.
///
/// The draw is seeded by `child_seed(master, "test", [t_next])`, so every
/// protocol evaluated at a step sees the identical test set.
pub fn evaluate_next_step(
    model: &TaskModel,
    schedule: &DriftSchedule,
    t_next: usize,
    n_test: usize,
    master_seed: u64,
) -> Result<f64> {
    let mut rng = seeding::child_rng(master_seed, "test", &[t_next as u64]);
    let test = schedule.test_set_at(t_next, n_test, &mut rng)?;
    model.accuracy(&test)
}

fn feature_dim_of(stream: &[TimedSample]) -> Result<usize> {
    Ok(stream
        .first()
        .ok_or(CoreError::Degenerate("empty stream"))?
        .x
        .len())
}
