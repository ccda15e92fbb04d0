//! Time-indexed importance-weight estimator.
//!
//! A scalar network `g(x, t)` is trained to tell *when* a sample was drawn:
//! for each stream sample, a contrast step `t_r` is drawn uniformly from the
//! other observed steps, and a logistic loss rewards `g` for scoring the
//! sample's own step above the contrast step. At the population optimum the
//! margin recovers the log density ratio between steps, so
//!
//! ```text
//! omega(x, T, t) = exp(g(x, T) - g(x, t))
//! ```
//!
//! estimates `p_T(x) / p_t(x)`: the factor that reweights a sample drawn at
//! step `t` to look like a draw from step `T`. Two loss variants exist:
//! [`Method::Method1`] trains the pairwise margin directly, while
//! [`Method::Method2`] pushes `g` up at the sample's own step and down at
//! contrast steps, recovering the same ratios when steps are sampled evenly.
//!
//! [`fit_standard_propensity`] is the time-free baseline: one binary
//! classifier between a pooled source set and a target set, whose logit
//! gives the classical covariate-shift weight `beta(x) = dq/dp`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::drift::TimedSample;
use crate::error::{CoreError, Result};
use crate::fmath;
use crate::matrix::Matrix;
use crate::nn::{AdamConfig, AdamState, DenseNet, NetGrads, NetSpec};
use crate::seeding::Rng;

// -------------------------------------------------------------- time encoding

/// Fixed sinusoidal embedding of a step index.
///
/// `t` is first normalized to `tau in [0, 1]` over the horizon, then encoded
/// as `[tau, sin(2 pi f tau), cos(2 pi f tau), ...]` for geometrically spaced
/// frequencies `f = 1, 2, 4, ...`. The raw `tau` channel keeps the encoding
/// injective; the oscillatory channels let a small network carve the horizon
/// into fine intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeEncoding {
    pub horizon: usize,
    pub frequencies: usize,
}

impl TimeEncoding {
    pub fn dim(&self) -> usize {
        1 + 2 * self.frequencies
    }

    /// Write the encoding of `t` into `out` (length must be `dim()`).
    pub fn encode_into(&self, t: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        let denom = if self.horizon > 1 {
            (self.horizon - 1) as f64
        } else {
            1.0
        };
        let tau = t as f64 / denom;
        out[0] = tau;
        let mut f = 1.0;
        for k in 0..self.frequencies {
            let arg = core::f64::consts::TAU * f * tau;
            out[1 + 2 * k] = fmath::sin(arg);
            out[2 + 2 * k] = fmath::cos(arg);
            f *= 2.0;
        }
    }

    pub fn encode(&self, t: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.encode_into(t, &mut v);
        v
    }
}

// ------------------------------------------------------------------ quadruple

/// Loss variant for the time-contrast objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Pairwise margin: `softplus(-z * (g(x, t2) - g(x, t1)))`.
    Method1,
    /// Single-sided: `softplus(-z * g(x, t2))`; only the first step of the
    /// pair enters the loss.
    Method2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Method1 => "method1",
            Method::Method2 => "method2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "method1" => Ok(Method::Method1),
            "method2" => Ok(Method::Method2),
            other => Err(CoreError::Parse(format!("unknown method '{other}'"))),
        }
    }
}

/// One training example for the contrast loss: a sample, an ordered pair of
/// steps, and the coin that chose the order.
///
/// `z = +1` means `t2` is the sample's own draw step and `t1` the contrast;
/// `z = -1` means the reverse. Either way the loss pushes `g` to score the
/// own step above the contrast step.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadruple {
    pub x: Vec<f64>,
    pub t2: usize,
    pub t1: usize,
    pub z: i8,
}

impl Quadruple {
    /// The sample's own draw step.
    pub fn own_step(&self) -> usize {
        if self.z > 0 {
            self.t2
        } else {
            self.t1
        }
    }

    /// The contrast step drawn for this example.
    pub fn contrast_step(&self) -> usize {
        if self.z > 0 {
            self.t1
        } else {
            self.t2
        }
    }
}

/// Build one contrast example per stream sample.
///
/// For sample `j` drawn at step `t_j`, a contrast step `t_r` is sampled
/// uniformly from the *other* distinct steps observed in `stream`, and a
/// fair coin `z` decides the presentation order. Training loops call this
/// once per epoch so each pass sees fresh contrasts.
///
/// Errors if the stream is empty or spans fewer than two distinct steps.
pub fn generate_data(stream: &[TimedSample], rng: &mut Rng) -> Result<Vec<Quadruple>> {
    let times = distinct_times(stream);
    if times.len() < 2 {
        return Err(CoreError::Degenerate(
            "generate_data: need at least two distinct steps",
        ));
    }
    let mut out = Vec::with_capacity(stream.len());
    for s in stream {
        // Uniform over observed steps excluding the sample's own: draw an
        // index into the K-1 others, skipping over the own slot.
        let own_ix = times
            .binary_search(&s.t)
            .expect("sample step must be an observed step");
        let mut r = rng.gen_range(0..times.len() - 1);
        if r >= own_ix {
            r += 1;
        }
        let t_r = times[r];
        let z: i8 = if rng.gen::<bool>() { 1 } else { -1 };
        let (t2, t1) = if z > 0 { (s.t, t_r) } else { (t_r, s.t) };
        out.push(Quadruple {
            x: s.x.clone(),
            t2,
            t1,
            z,
        });
    }
    Ok(out)
}

/// Sorted distinct draw steps present in a stream.
pub fn distinct_times(stream: &[TimedSample]) -> Vec<usize> {
    let mut times: Vec<usize> = stream.iter().map(|s| s.t).collect();
    times.sort_unstable();
    times.dedup();
    times
}

// ------------------------------------------------------------------ estimator

/// Architecture and weight-shaping options for the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSpec {
    /// Hidden layer widths of `g`.
    pub hidden: Vec<usize>,
    /// Batch normalization on hidden layers.
    pub batchnorm: bool,
    /// Number of sinusoid pairs in the time encoding.
    pub frequencies: usize,
    /// Loss variant.
    pub method: Method,
    /// Importance weights are capped at this value; `None` leaves them raw.
    pub clip: Option<f64>,
}

impl Default for OmegaSpec {
    fn default() -> Self {
        OmegaSpec {
            hidden: vec![32, 32],
            batchnorm: false,
            frequencies: 4,
            method: Method::Method1,
            clip: Some(1.0),
        }
    }
}

/// Training-loop knobs for [`train`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaTrainConfig {
    /// Full passes over the stream.
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Fraction of samples reserved for the held-out report.
    pub holdout_frac: f64,
    /// Redraw contrast steps every epoch (otherwise only once).
    pub regenerate_each_epoch: bool,
}

impl Default for OmegaTrainConfig {
    fn default() -> Self {
        OmegaTrainConfig {
            epochs: 8,
            batch_size: 512,
            lr: 1e-3,
            holdout_frac: 0.1,
            regenerate_each_epoch: true,
        }
    }
}

/// Before/after metrics on a held-out contrast set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    /// Held-out loss before any update.
    pub initial_loss: f64,
    /// Held-out loss after the final epoch, on the same contrast set.
    pub final_loss: f64,
    /// Fraction of held-out contrasts ordered correctly after training.
    pub holdout_accuracy: f64,
    /// Contrast examples per training epoch.
    pub examples_per_epoch: usize,
    pub epochs: usize,
}

/// The time-indexed importance-weight model.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEstimator {
    net: DenseNet,
    encoding: TimeEncoding,
    feature_dim: usize,
    method: Method,
    clip: Option<f64>,
    trained: bool,
}

impl OmegaEstimator {
    /// Fresh estimator for samples of `feature_dim` features over step
    /// indices `0..horizon`.
    pub fn init(
        feature_dim: usize,
        horizon: usize,
        spec: &OmegaSpec,
        rng: &mut Rng,
    ) -> Result<Self> {
        if feature_dim == 0 || horizon == 0 {
            return Err(CoreError::InvalidConfig(
                "feature_dim and horizon must be positive".into(),
            ));
        }
        if spec.frequencies == 0 {
            return Err(CoreError::InvalidConfig(
                "need at least one encoding frequency".into(),
            ));
        }
        if let Some(c) = spec.clip {
            if !(c.is_finite() && c > 0.0) {
                return Err(CoreError::OutOfRange {
                    context: "OmegaEstimator clip",
                    value: c,
                });
            }
        }
        let encoding = TimeEncoding {
            horizon,
            frequencies: spec.frequencies,
        };
        let net_spec = NetSpec::new(feature_dim + encoding.dim(), &spec.hidden, 1)
            .with_batchnorm(spec.batchnorm);
        Ok(OmegaEstimator {
            net: DenseNet::init(&net_spec, rng)?,
            encoding,
            feature_dim,
            method: spec.method,
            clip: spec.clip,
            trained: false,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn clip(&self) -> Option<f64> {
        self.clip
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn horizon(&self) -> usize {
        self.encoding.horizon
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// Grow the encodable horizon (used by online callers whose step index
    /// keeps advancing). Shrinking is rejected: it would change encodings of
    /// steps the network was already trained on... and so would growing, but
    /// callers that grow retrain immediately afterwards.
    pub fn set_horizon(&mut self, horizon: usize) -> Result<()> {
        if horizon < self.encoding.horizon {
            return Err(CoreError::InvalidConfig(
                "horizon can only grow".into(),
            ));
        }
        self.encoding.horizon = horizon;
        Ok(())
    }

    /// Direct access to the scoring network (finite-difference checks,
    /// optimizer hookup).
    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut DenseNet {
        &mut self.net
    }

    fn check_x(&self, x: &[f64], context: &'static str) -> Result<()> {
        if x.len() != self.feature_dim {
            return Err(CoreError::ShapeMismatch {
                context,
                expected: (1, self.feature_dim),
                actual: (1, x.len()),
            });
        }
        Ok(())
    }

    fn check_t(&self, t: usize, context: &'static str) -> Result<()> {
        if t >= self.encoding.horizon {
            return Err(CoreError::IndexOutOfRange {
                context,
                index: t,
                limit: self.encoding.horizon,
            });
        }
        Ok(())
    }

    fn row_dim(&self) -> usize {
        self.feature_dim + self.encoding.dim()
    }

    fn fill_row(&self, row: &mut [f64], x: &[f64], t: usize) {
        row[..self.feature_dim].copy_from_slice(x);
        self.encoding
            .encode_into(t, &mut row[self.feature_dim..]);
    }

    /// Score `g(x, t)` for a single sample (inference mode).
    pub fn score(&self, x: &[f64], t: usize) -> Result<f64> {
        self.check_x(x, "OmegaEstimator::score")?;
        self.check_t(t, "OmegaEstimator::score")?;
        let mut m = Matrix::zeros(1, self.row_dim());
        self.fill_row(m.row_mut(0), x, t);
        Ok(self.net.forward(&m)?.get(0, 0))
    }

    /// Unclipped log weight `g(x, target) - g(x, source)`.
    ///
    /// `log_weight(x, t, t)` is exactly zero: both scores come from the same
    /// deterministic forward pass.
    pub fn log_weight(&self, x: &[f64], target: usize, source: usize) -> Result<f64> {
        Ok(self.score(x, target)? - self.score(x, source)?)
    }

    /// Importance weight `omega(x, target, source)`, capped when
    /// [`OmegaSpec::clip`] is set.
    pub fn omega(&self, x: &[f64], target: usize, source: usize) -> Result<f64> {
        let w = fmath::exp(self.log_weight(x, target, source)?);
        Ok(match self.clip {
            Some(c) => w.min(c),
            None => w,
        })
    }

    /// Clipped weights `omega(x_i, target, t_i)` for a whole slice, batched
    /// into two forward passes.
    pub fn weights_at(&self, samples: &[TimedSample], target: usize) -> Result<Vec<f64>> {
        if samples.is_empty() {
            return Err(CoreError::Degenerate("OmegaEstimator::weights_at"));
        }
        self.check_t(target, "OmegaEstimator::weights_at")?;
        let n = samples.len();
        let mut m = Matrix::zeros(2 * n, self.row_dim());
        for (i, s) in samples.iter().enumerate() {
            self.check_x(&s.x, "OmegaEstimator::weights_at")?;
            self.check_t(s.t, "OmegaEstimator::weights_at")?;
            self.fill_row(m.row_mut(2 * i), &s.x, target);
            self.fill_row(m.row_mut(2 * i + 1), &s.x, s.t);
        }
        let g = self.net.forward(&m)?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let w = fmath::exp(g.get(2 * i, 0) - g.get(2 * i + 1, 0));
            out.push(match self.clip {
                Some(c) => w.min(c),
                None => w,
            });
        }
        Ok(out)
    }

    /// Assemble the network input rows for a batch of contrast examples.
    ///
    /// Method 1 consumes two rows per example (`t2` then `t1`); method 2
    /// only scores `t2`.
    fn batch_rows(&self, batch: &[Quadruple]) -> Result<Matrix> {
        let per = match self.method {
            Method::Method1 => 2,
            Method::Method2 => 1,
        };
        let mut m = Matrix::zeros(per * batch.len(), self.row_dim());
        for (i, q) in batch.iter().enumerate() {
            self.check_x(&q.x, "OmegaEstimator batch")?;
            self.check_t(q.t2, "OmegaEstimator batch")?;
            self.check_t(q.t1, "OmegaEstimator batch")?;
            if q.z != 1 && q.z != -1 {
                return Err(CoreError::OutOfRange {
                    context: "quadruple z",
                    value: q.z as f64,
                });
            }
            self.fill_row(m.row_mut(per * i), &q.x, q.t2);
            if per == 2 {
                self.fill_row(m.row_mut(per * i + 1), &q.x, q.t1);
            }
        }
        Ok(m)
    }

    /// Mean contrast loss of a batch (training-mode forward).
    ///
    /// Method 1: `softplus(-z * (g(x,t2) - g(x,t1)))`;
    /// method 2: `softplus(-z * g(x,t2))`.
    pub fn batch_loss(&self, batch: &[Quadruple]) -> Result<f64> {
        if batch.is_empty() {
            return Err(CoreError::Degenerate("OmegaEstimator::batch_loss"));
        }
        let rows = self.batch_rows(batch)?;
        let (g, _) = self.net.forward_train(&rows)?;
        let mut loss = 0.0;
        for (i, q) in batch.iter().enumerate() {
            let z = q.z as f64;
            let u = match self.method {
                Method::Method1 => -z * (g.get(2 * i, 0) - g.get(2 * i + 1, 0)),
                Method::Method2 => -z * g.get(i, 0),
            };
            loss += fmath::softplus(u);
        }
        Ok(loss / batch.len() as f64)
    }

    /// Mean contrast loss and its parameter gradients for one batch.
    pub fn batch_loss_and_grads(&self, batch: &[Quadruple]) -> Result<(f64, NetGrads)> {
        let (loss, grads, _) = self.batch_step(batch)?;
        Ok((loss, grads))
    }

    /// Loss, gradients, and the forward cache (for batch-stat absorption).
    fn batch_step(&self, batch: &[Quadruple]) -> Result<(f64, NetGrads, crate::nn::ForwardCache)> {
        if batch.is_empty() {
            return Err(CoreError::Degenerate(
                "OmegaEstimator::batch_loss_and_grads",
            ));
        }
        let rows = self.batch_rows(batch)?;
        let (g, cache) = self.net.forward_train(&rows)?;
        let b = batch.len() as f64;
        let mut loss = 0.0;
        let mut d = Matrix::zeros(g.rows(), 1);
        for (i, q) in batch.iter().enumerate() {
            let z = q.z as f64;
            match self.method {
                Method::Method1 => {
                    let u = -z * (g.get(2 * i, 0) - g.get(2 * i + 1, 0));
                    loss += fmath::softplus(u);
                    let s = fmath::sigmoid(u);
                    d.set(2 * i, 0, -z * s / b);
                    d.set(2 * i + 1, 0, z * s / b);
                }
                Method::Method2 => {
                    let u = -z * g.get(i, 0);
                    loss += fmath::softplus(u);
                    d.set(i, 0, -z * fmath::sigmoid(u) / b);
                }
            }
        }
        let (grads, _) = self.net.backward(&cache, &d, false)?;
        Ok((loss / b, grads, cache))
    }

    /// Fraction of contrast examples whose pair the model orders correctly.
    pub fn contrast_accuracy(&self, batch: &[Quadruple]) -> Result<f64> {
        if batch.is_empty() {
            return Err(CoreError::Degenerate(
                "OmegaEstimator::contrast_accuracy",
            ));
        }
        let rows = self.batch_rows(batch)?;
        let g = self.net.forward(&rows)?;
        let mut correct = 0usize;
        for (i, q) in batch.iter().enumerate() {
            let z = q.z as f64;
            let margin = match self.method {
                Method::Method1 => z * (g.get(2 * i, 0) - g.get(2 * i + 1, 0)),
                Method::Method2 => z * g.get(i, 0),
            };
            if margin > 0.0 {
                correct += 1;
            }
        }
        Ok(correct as f64 / batch.len() as f64)
    }
}

// ------------------------------------------------------------------- training

/// Train an estimator on a stream with the contrast objective.
///
/// Each epoch redraws contrast steps (when configured), shuffles, and takes
/// Adam steps over minibatches. A held-out slice of the stream, fixed before
/// training, measures progress: the report carries its loss before and after
/// training. An untrained estimator sits near `softplus(0) = ln 2`; any real
/// time structure pulls the held-out loss below that.
pub fn train(
    est: &mut OmegaEstimator,
    stream: &[TimedSample],
    cfg: &OmegaTrainConfig,
    rng: &mut Rng,
) -> Result<TrainReport> {
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(CoreError::InvalidConfig(
            "epochs and batch_size must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&cfg.holdout_frac) {
        return Err(CoreError::OutOfRange {
            context: "holdout_frac",
            value: cfg.holdout_frac,
        });
    }
    if stream.len() < 2 || distinct_times(stream).len() < 2 {
        return Err(CoreError::Degenerate(
            "train: need at least two samples spanning two steps",
        ));
    }

    // Split off the held-out slice. The holdout must itself span two steps
    // to admit contrasts; if the draw fails that (tiny streams), fall back
    // to measuring on the training slice.
    let mut order: Vec<usize> = (0..stream.len()).collect();
    order.shuffle(rng);
    let n_hold = ((stream.len() as f64 * cfg.holdout_frac) as usize).min(stream.len() - 2);
    let (hold_ix, train_ix) = order.split_at(n_hold);
    let mut holdout: Vec<TimedSample> = hold_ix.iter().map(|&i| stream[i].clone()).collect();
    let train_set: Vec<TimedSample> = train_ix.iter().map(|&i| stream[i].clone()).collect();
    if distinct_times(&holdout).len() < 2 {
        holdout = train_set.clone();
    }
    if distinct_times(&train_set).len() < 2 {
        return Err(CoreError::Degenerate(
            "train: training slice spans fewer than two steps",
        ));
    }

    let holdout_quads = generate_data(&holdout, rng)?;
    let initial_loss = est.batch_loss(&holdout_quads)?;

    let mut adam = AdamState::new(&est.net, AdamConfig::with_lr(cfg.lr));
    let mut quads: Vec<Quadruple> = Vec::new();
    for epoch in 0..cfg.epochs {
        if epoch == 0 || cfg.regenerate_each_epoch {
            quads = generate_data(&train_set, rng)?;
        }
        quads.shuffle(rng);
        for batch in quads.chunks(cfg.batch_size) {
            let (_, grads, cache) = est.batch_step(batch)?;
            adam.step(&mut est.net, &grads)?;
            est.net.absorb_batch_stats(&cache);
        }
    }

    let final_loss = est.batch_loss(&holdout_quads)?;
    let holdout_accuracy = est.contrast_accuracy(&holdout_quads)?;
    if !final_loss.is_finite() {
        return Err(CoreError::NonFinite("train: final holdout loss"));
    }
    est.trained = true;
    Ok(TrainReport {
        initial_loss,
        final_loss,
        holdout_accuracy,
        examples_per_epoch: train_set.len(),
        epochs: cfg.epochs,
    })
}

/// Convenience: init + train in one call.
pub fn fit(
    stream: &[TimedSample],
    horizon: usize,
    spec: &OmegaSpec,
    cfg: &OmegaTrainConfig,
    rng: &mut Rng,
) -> Result<(OmegaEstimator, TrainReport)> {
    let feature_dim = stream
        .first()
        .ok_or(CoreError::Degenerate("fit: empty stream"))?
        .x
        .len();
    let mut est = OmegaEstimator::init(feature_dim, horizon, spec, rng)?;
    let report = train(&mut est, stream, cfg, rng)?;
    Ok((est, report))
}

// -------------------------------------------------------- standard propensity

/// Time-free covariate-shift weights from a binary source-vs-target
/// classifier: `beta(x) = exp(-g(x))` estimates `dq/dp` where `p` is the
/// source (training pool) density and `q` the target density.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaEstimator {
    net: DenseNet,
    feature_dim: usize,
    clip: Option<f64>,
}

impl BetaEstimator {
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Classifier logit `g(x)`; at the optimum `g(x) = log(p(x) / q(x))`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_dim {
            return Err(CoreError::ShapeMismatch {
                context: "BetaEstimator::score",
                expected: (1, self.feature_dim),
                actual: (1, x.len()),
            });
        }
        let mut m = Matrix::zeros(1, self.feature_dim);
        m.row_mut(0).copy_from_slice(x);
        Ok(self.net.forward(&m)?.get(0, 0))
    }

    /// Clipped weight `beta(x) = exp(-g(x))`.
    pub fn beta(&self, x: &[f64]) -> Result<f64> {
        let w = fmath::exp(-self.score(x)?);
        Ok(match self.clip {
            Some(c) => w.min(c),
            None => w,
        })
    }

    /// Clipped weights for a whole slice in one forward pass.
    pub fn beta_batch(&self, samples: &[TimedSample]) -> Result<Vec<f64>> {
        if samples.is_empty() {
            return Err(CoreError::Degenerate("BetaEstimator::beta_batch"));
        }
        let mut m = Matrix::zeros(samples.len(), self.feature_dim);
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != self.feature_dim {
                return Err(CoreError::ShapeMismatch {
                    context: "BetaEstimator::beta_batch",
                    expected: (1, self.feature_dim),
                    actual: (1, s.x.len()),
                });
            }
            m.row_mut(i).copy_from_slice(&s.x);
        }
        let g = self.net.forward(&m)?;
        Ok((0..samples.len())
            .map(|i| {
                let w = fmath::exp(-g.get(i, 0));
                match self.clip {
                    Some(c) => w.min(c),
                    None => w,
                }
            })
            .collect())
    }
}

/// Knobs for [`fit_standard_propensity`].
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTrainConfig {
    /// Hidden layer widths of the classifier.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub clip: Option<f64>,
}

impl Default for BetaTrainConfig {
    fn default() -> Self {
        BetaTrainConfig {
            hidden: vec![32, 32],
            epochs: 20,
            batch_size: 256,
            lr: 1e-3,
            clip: Some(1.0),
        }
    }
}

/// Fit the standard (time-free) propensity classifier between a source pool
/// `p` and a target sample `q`.
///
/// The two sides are balanced by subsampling the larger one, then a logistic
/// loss `softplus(-z g(x))` with `z = +1` on source and `z = -1` on target
/// is minimized. Weights come out as `beta(x) = exp(-g(x))`.
pub fn fit_standard_propensity(
    p_samples: &[TimedSample],
    q_samples: &[TimedSample],
    cfg: &BetaTrainConfig,
    rng: &mut Rng,
) -> Result<BetaEstimator> {
    if p_samples.is_empty() || q_samples.is_empty() {
        return Err(CoreError::Degenerate(
            "fit_standard_propensity: empty side",
        ));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(CoreError::InvalidConfig(
            "epochs and batch_size must be positive".into(),
        ));
    }
    let feature_dim = p_samples[0].x.len();
    for s in p_samples.iter().chain(q_samples.iter()) {
        if s.x.len() != feature_dim {
            return Err(CoreError::ShapeMismatch {
                context: "fit_standard_propensity",
                expected: (1, feature_dim),
                actual: (1, s.x.len()),
            });
        }
    }

    // Balance the classes: subsample the larger side down to the smaller.
    let m = p_samples.len().min(q_samples.len());
    let pick = |side: &[TimedSample], rng: &mut Rng| -> Vec<Vec<f64>> {
        let mut ix: Vec<usize> = (0..side.len()).collect();
        ix.shuffle(rng);
        ix[..m].iter().map(|&i| side[i].x.clone()).collect()
    };
    let px = pick(p_samples, rng);
    let qx = pick(q_samples, rng);

    let spec = NetSpec::new(feature_dim, &cfg.hidden, 1);
    let mut net = DenseNet::init(&spec, rng)?;
    let mut adam = AdamState::new(&net, AdamConfig::with_lr(cfg.lr));

    // (x, z) pairs, reshuffled each epoch.
    let mut examples: Vec<(usize, f64)> = (0..m)
        .map(|i| (i, 1.0))
        .chain((0..m).map(|i| (i, -1.0)))
        .collect();
    for _ in 0..cfg.epochs {
        examples.shuffle(rng);
        for batch in examples.chunks(cfg.batch_size) {
            let mut rows = Matrix::zeros(batch.len(), feature_dim);
            for (r, &(i, z)) in batch.iter().enumerate() {
                let src = if z > 0.0 { &px[i] } else { &qx[i] };
                rows.row_mut(r).copy_from_slice(src);
            }
            let (g, cache) = net.forward_train(&rows)?;
            let b = batch.len() as f64;
            let mut d = Matrix::zeros(batch.len(), 1);
            for (r, &(_, z)) in batch.iter().enumerate() {
                let u = -z * g.get(r, 0);
                d.set(r, 0, -z * fmath::sigmoid(u) / b);
            }
            let (grads, _) = net.backward(&cache, &d, false)?;
            adam.step(&mut net, &grads)?;
        }
    }

    Ok(BetaEstimator {
        net,
        feature_dim,
        clip: cfg.clip,
    })
}

// ------------------------------------------------------------------ snapshots

impl OmegaEstimator {
    /// Serialize to text: a small header (method, clip, dims, train flag)
    /// followed by the network snapshot. Round-trips bit-exactly.
    pub fn snapshot_to_string(&self) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "omega-estimator v1");
        let _ = writeln!(out, "method {}", self.method.name());
        match self.clip {
            Some(c) => {
                let _ = writeln!(out, "clip {c:?}");
            }
            None => {
                let _ = writeln!(out, "clip none");
            }
        }
        let _ = writeln!(out, "horizon {}", self.encoding.horizon);
        let _ = writeln!(out, "frequencies {}", self.encoding.frequencies);
        let _ = writeln!(out, "feature_dim {}", self.feature_dim);
        let _ = writeln!(out, "trained {}", self.trained);
        out.push_str(&self.net.snapshot_to_string()?);
        Ok(out)
    }

    /// Parse a snapshot produced by [`OmegaEstimator::snapshot_to_string`].
    pub fn snapshot_from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let mut field = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| CoreError::Parse("unexpected end of snapshot".into()))?;
            line.strip_prefix(name)
                .map(|v| v.trim().into())
                .ok_or_else(|| CoreError::Parse(format!("expected '{name}' line, got '{line}'")))
        };
        if field("omega-estimator")? != "v1" {
            return Err(CoreError::Parse("unsupported snapshot version".into()));
        }
        let method = Method::parse(&field("method")?)?;
        let clip_s = field("clip")?;
        let clip = if clip_s == "none" {
            None
        } else {
            Some(
                clip_s
                    .parse::<f64>()
                    .map_err(|e| CoreError::Parse(format!("bad clip: {e}")))?,
            )
        };
        let horizon: usize = field("horizon")?
            .parse()
            .map_err(|e| CoreError::Parse(format!("bad horizon: {e}")))?;
        let frequencies: usize = field("frequencies")?
            .parse()
            .map_err(|e| CoreError::Parse(format!("bad frequencies: {e}")))?;
        let feature_dim: usize = field("feature_dim")?
            .parse()
            .map_err(|e| CoreError::Parse(format!("bad feature_dim: {e}")))?;
        let trained: bool = field("trained")?
            .parse()
            .map_err(|e| CoreError::Parse(format!("bad trained flag: {e}")))?;
        let rest: Vec<&str> = lines.collect();
        let net = DenseNet::snapshot_from_str(&rest.join("\n"))?;
        let encoding = TimeEncoding {
            horizon,
            frequencies,
        };
        if net.input_dim() != feature_dim + encoding.dim() {
            return Err(CoreError::Parse(
                "network input does not match feature_dim + encoding".into(),
            ));
        }
        if horizon == 0 || feature_dim == 0 {
            return Err(CoreError::Parse("zero horizon or feature_dim".into()));
        }
        Ok(OmegaEstimator {
            net,
            encoding,
            feature_dim,
            method,
            clip,
            trained,
        })
    }
}

// ---------------------------------------------------------------------- tests
