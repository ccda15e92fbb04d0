//! Dense feed-forward networks with reverse-mode gradients and Adam.
//!
//! Everything here is deliberately small and explicit: row-major matrices,
//! batched forward/backward passes written as loops over rows, and a text
//! snapshot format that round-trips every parameter bit-exactly. Forward
//! passes are pure functions — training-mode batch statistics are computed
//! on the fly and returned in the cache, and running statistics only change
//! through an explicit [`DenseNet::absorb_batch_stats`] call — so the same
//! code path serves training, evaluation, and finite-difference checks.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng as _;

use crate::error::{CoreError, Result};
use crate::fmath;
use crate::matrix::{axpy, dot, Matrix};
use crate::seeding::Rng;

// ---------------------------------------------------------------- activations

/// Element-wise nonlinearity applied after each layer's affine map (and
/// batch normalization, when enabled).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// Pass-through, used on output layers.
    Identity,
    /// max(0, x) on hidden layers.
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Identity => v,
            Activation::Relu => {
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative as a function of the pre-activation value.
    #[inline]
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            other => Err(CoreError::Parse(format!("unknown activation '{other}'"))),
        }
    }
}

// ------------------------------------------------------------------ batchnorm

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.1;

/// Per-feature batch normalization state.
///
/// Training-mode forward normalizes with the current batch's mean and biased
/// variance; inference-mode forward uses the running estimates. The running
/// estimates are updated only by [`DenseNet::absorb_batch_stats`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNorm {
    fn new(dim: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; dim],
            beta: vec![0.0; dim],
            running_mean: vec![0.0; dim],
            running_var: vec![1.0; dim],
        }
    }
}

// ---------------------------------------------------------------------- layer

/// One dense layer: `y = act(norm(W x + b))` with `W` stored `[out x in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub activation: Activation,
    pub norm: Option<BatchNorm>,
}

impl Layer {
    fn out_dim(&self) -> usize {
        self.w.rows()
    }

    fn in_dim(&self) -> usize {
        self.w.cols()
    }
}

// ------------------------------------------------------------------- net spec

/// Shape description used to build a [`DenseNet`].
///
/// Hidden layers use ReLU (optionally preceded by batch normalization); the
/// output layer is affine with identity activation.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
    pub batchnorm: bool,
}

impl NetSpec {
    pub fn new(input: usize, hidden: &[usize], output: usize) -> Self {
        NetSpec {
            input,
            hidden: hidden.to_vec(),
            output,
            batchnorm: false,
        }
    }

    pub fn with_batchnorm(mut self, on: bool) -> Self {
        self.batchnorm = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.input == 0 || self.output == 0 || self.hidden.iter().any(|&h| h == 0) {
            return Err(CoreError::InvalidConfig(
                "network dimensions must be positive".into(),
            ));
        }
        Ok(())
    }
}

// ------------------------------------------------------------------ dense net

/// A feed-forward network of [`Layer`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

/// Cached intermediates from a training-mode forward pass, consumed by
/// [`DenseNet::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `acts[0]` is the input batch; `acts[l + 1]` is layer `l`'s output.
    acts: Vec<Matrix>,
    /// Per layer: the value fed to the activation (post-norm when present).
    pre_acts: Vec<Matrix>,
    /// Per layer with batchnorm: normalized values and batch statistics.
    bn: Vec<Option<BnCache>>,
}

#[derive(Debug, Clone)]
struct BnCache {
    xhat: Matrix,
    inv_std: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
}

/// Parameter gradients, one flat tensor per parameter tensor of the network,
/// in the canonical order: per layer `w, b[, gamma, beta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads {
    pub tensors: Vec<Vec<f64>>,
}

impl DenseNet {
    /// Build a network from a spec with Xavier-uniform weights
    /// (`U(-l, l)` with `l = sqrt(6 / (fan_in + fan_out))`), zero biases,
    /// and identity-initialized normalization.
    pub fn init(spec: &NetSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let mut dims = Vec::with_capacity(spec.hidden.len() + 2);
        dims.push(spec.input);
        dims.extend_from_slice(&spec.hidden);
        dims.push(spec.output);

        let mut layers = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let limit = fmath::sqrt(6.0 / (fan_in + fan_out) as f64);
            let mut w = Matrix::zeros(fan_out, fan_in);
            for v in w.as_mut_slice() {
                *v = rng.gen_range(-limit..limit);
            }
            let is_hidden = l + 1 < dims.len() - 1;
            layers.push(Layer {
                w,
                b: vec![0.0; fan_out],
                activation: if is_hidden {
                    Activation::Relu
                } else {
                    Activation::Identity
                },
                norm: if is_hidden && spec.batchnorm {
                    Some(BatchNorm::new(fan_out))
                } else {
                    None
                },
            });
        }
        Ok(DenseNet { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Total number of trainable scalars.
    pub fn num_params(&self) -> usize {
        self.param_tensors().iter().map(|t| t.len()).sum()
    }

    /// Immutable views of all parameter tensors in canonical order.
    pub fn param_tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.push(layer.w.as_slice());
            out.push(layer.b.as_slice());
            if let Some(bn) = &layer.norm {
                out.push(bn.gamma.as_slice());
                out.push(bn.beta.as_slice());
            }
        }
        out
    }

    /// Mutable views of all parameter tensors in canonical order; used by
    /// the optimizer and by finite-difference checks.
    pub fn param_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            let Layer { w, b, norm, .. } = layer;
            out.push(w.as_mut_slice());
            out.push(b.as_mut_slice());
            if let Some(bn) = norm {
                out.push(bn.gamma.as_mut_slice());
                out.push(bn.beta.as_mut_slice());
            }
        }
        out
    }

    fn check_input(&self, x: &Matrix, context: &'static str) -> Result<()> {
        if x.rows() == 0 {
            return Err(CoreError::Degenerate(context));
        }
        if x.cols() != self.input_dim() {
            return Err(CoreError::ShapeMismatch {
                context,
                expected: (x.rows(), self.input_dim()),
                actual: (x.rows(), x.cols()),
            });
        }
        Ok(())
    }

    fn affine(layer: &Layer, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), layer.out_dim());
        for b in 0..x.rows() {
            let xb = x.row(b);
            let ob = out.row_mut(b);
            for (j, o) in ob.iter_mut().enumerate() {
                *o = dot(layer.w.row(j), xb) + layer.b[j];
            }
        }
        out
    }

    /// Inference-mode forward pass: batchnorm layers use running statistics.
    /// Pure; identical inputs give bit-identical outputs.
    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x, "DenseNet::forward")?;
        let mut cur = x.clone();
        for layer in &self.layers {
            let mut a = Self::affine(layer, &cur);
            if let Some(bn) = &layer.norm {
                for b in 0..a.rows() {
                    let row = a.row_mut(b);
                    for (j, v) in row.iter_mut().enumerate() {
                        let inv = 1.0 / fmath::sqrt(bn.running_var[j] + BN_EPS);
                        *v = bn.gamma[j] * (*v - bn.running_mean[j]) * inv + bn.beta[j];
                    }
                }
            }
            for v in a.as_mut_slice() {
                *v = layer.activation.apply(*v);
            }
            cur = a;
        }
        Ok(cur)
    }

    /// Training-mode forward pass: batchnorm layers normalize with the
    /// current batch's statistics. Returns the output and the cache needed
    /// for [`DenseNet::backward`]. Pure — running statistics are untouched.
    pub fn forward_train(&self, x: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(x, "DenseNet::forward_train")?;
        let rows = x.rows();
        let mut cache = ForwardCache {
            acts: Vec::with_capacity(self.layers.len() + 1),
            pre_acts: Vec::with_capacity(self.layers.len()),
            bn: Vec::with_capacity(self.layers.len()),
        };
        cache.acts.push(x.clone());
        for layer in &self.layers {
            let cur = cache.acts.last().expect("non-empty acts");
            let mut a = Self::affine(layer, cur);
            let bn_cache = if let Some(bn) = &layer.norm {
                let dim = layer.out_dim();
                let mut mean = vec![0.0; dim];
                let mut var = vec![0.0; dim];
                for b in 0..rows {
                    for (j, &v) in a.row(b).iter().enumerate() {
                        mean[j] += v;
                    }
                }
                for m in &mut mean {
                    *m /= rows as f64;
                }
                for b in 0..rows {
                    for (j, &v) in a.row(b).iter().enumerate() {
                        let d = v - mean[j];
                        var[j] += d * d;
                    }
                }
                for v in &mut var {
                    *v /= rows as f64;
                }
                let inv_std: Vec<f64> =
                    var.iter().map(|&v| 1.0 / fmath::sqrt(v + BN_EPS)).collect();
                let mut xhat = Matrix::zeros(rows, dim);
                for b in 0..rows {
                    let src = a.row(b);
                    let dst = xhat.row_mut(b);
                    for j in 0..dim {
                        dst[j] = (src[j] - mean[j]) * inv_std[j];
                    }
                }
                for b in 0..rows {
                    let xh = xhat.row(b);
                    let out = a.row_mut(b);
                    for j in 0..dim {
                        out[j] = bn.gamma[j] * xh[j] + bn.beta[j];
                    }
                }
                Some(BnCache {
                    xhat,
                    inv_std,
                    mean,
                    var,
                })
            } else {
                None
            };
            cache.bn.push(bn_cache);
            cache.pre_acts.push(a.clone());
            for v in a.as_mut_slice() {
                *v = layer.activation.apply(*v);
            }
            cache.acts.push(a);
        }
        let out = cache.acts.last().expect("non-empty acts").clone();
        Ok((out, cache))
    }

    /// Fold the batch statistics recorded in `cache` into the running
    /// estimates (exponential moving average, momentum 0.1). Called once per
    /// optimizer step by training loops that enable batchnorm.
    pub fn absorb_batch_stats(&mut self, cache: &ForwardCache) {
        for (layer, bn_cache) in self.layers.iter_mut().zip(cache.bn.iter()) {
            if let (Some(bn), Some(c)) = (&mut layer.norm, bn_cache) {
                for j in 0..bn.running_mean.len() {
                    bn.running_mean[j] =
                        (1.0 - BN_MOMENTUM) * bn.running_mean[j] + BN_MOMENTUM * c.mean[j];
                    bn.running_var[j] =
                        (1.0 - BN_MOMENTUM) * bn.running_var[j] + BN_MOMENTUM * c.var[j];
                }
            }
        }
    }

    /// Reverse-mode gradients. `d_out` is dL/d(output), `[batch x out]`,
    /// including any loss-side scaling (e.g. 1/batch for a mean loss).
    /// Returns parameter gradients and, when `need_input_grad`, dL/d(input).
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_out: &Matrix,
        need_input_grad: bool,
    ) -> Result<(NetGrads, Option<Matrix>)> {
        let rows = cache.acts[0].rows();
        let last = self.layers.len() - 1;
        if d_out.rows() != rows || d_out.cols() != self.layers[last].out_dim() {
            return Err(CoreError::ShapeMismatch {
                context: "DenseNet::backward",
                expected: (rows, self.layers[last].out_dim()),
                actual: (d_out.rows(), d_out.cols()),
            });
        }

        let mut tensors: Vec<Vec<f64>> = Vec::new();
        let mut d = d_out.clone();
        // Gradients are produced back-to-front, then reversed into the
        // canonical front-to-back tensor order.
        let mut rev_tensors: Vec<Vec<f64>> = Vec::new();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let pre = &cache.pre_acts[l];
            for b in 0..rows {
                let pr = pre.row(b);
                let dr = d.row_mut(b);
                for j in 0..dr.len() {
                    dr[j] *= layer.activation.derivative(pr[j]);
                }
            }

            let (mut dgamma, mut dbeta) = (Vec::new(), Vec::new());
            if let (Some(bn), Some(c)) = (&layer.norm, &cache.bn[l]) {
                let dim = layer.out_dim();
                dgamma = vec![0.0; dim];
                dbeta = vec![0.0; dim];
                // e = dL/d(xhat); the batch means below come from
                // differentiating through the batch mean and variance.
                let mut mean_e = vec![0.0; dim];
                let mut mean_ex = vec![0.0; dim];
                for b in 0..rows {
                    let dr = d.row(b);
                    let xh = c.xhat.row(b);
                    for j in 0..dim {
                        dgamma[j] += dr[j] * xh[j];
                        dbeta[j] += dr[j];
                        let e = dr[j] * bn.gamma[j];
                        mean_e[j] += e;
                        mean_ex[j] += e * xh[j];
                    }
                }
                let n = rows as f64;
                for j in 0..dim {
                    mean_e[j] /= n;
                    mean_ex[j] /= n;
                }
                for b in 0..rows {
                    let xh = c.xhat.row(b);
                    let dr = d.row_mut(b);
                    for j in 0..dim {
                        let e = dr[j] * bn.gamma[j];
                        dr[j] = c.inv_std[j] * (e - mean_e[j] - xh[j] * mean_ex[j]);
                    }
                }
            }

            let x = &cache.acts[l];
            let mut dw = vec![0.0; layer.out_dim() * layer.in_dim()];
            let mut db = vec![0.0; layer.out_dim()];
            let in_dim = layer.in_dim();
            for b in 0..rows {
                let xb = x.row(b);
                let dr = d.row(b);
                for (j, &s) in dr.iter().enumerate() {
                    db[j] += s;
                    axpy(&mut dw[j * in_dim..(j + 1) * in_dim], s, xb);
                }
            }

            let compute_dx = l > 0 || need_input_grad;
            if compute_dx {
                let mut dx = Matrix::zeros(rows, in_dim);
                for b in 0..rows {
                    let dr = d.row(b);
                    let out_row = dx.row_mut(b);
                    for (j, &s) in dr.iter().enumerate() {
                        axpy(out_row, s, layer.w.row(j));
                    }
                }
                if !dgamma.is_empty() {
                    rev_tensors.push(dbeta);
                    rev_tensors.push(dgamma);
                }
                rev_tensors.push(db);
                rev_tensors.push(dw);
                d = dx;
            } else {
                if !dgamma.is_empty() {
                    rev_tensors.push(dbeta);
                    rev_tensors.push(dgamma);
                }
                rev_tensors.push(db);
                rev_tensors.push(dw);
            }
        }
        while let Some(t) = rev_tensors.pop() {
            tensors.push(t);
        }
        let input_grad = if need_input_grad { Some(d) } else { None };
        Ok((NetGrads { tensors }, input_grad))
    }
}

// ----------------------------------------------------------------------- adam

/// Adam hyperparameters; the defaults besides the learning rate are the
/// conventional ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam optimizer state: first/second moment estimates per parameter tensor
/// and the step counter used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh optimizer state shaped like `net`'s parameters.
    pub fn new(net: &DenseNet, cfg: AdamConfig) -> Self {
        let sizes: Vec<usize> = net.param_tensors().iter().map(|t| t.len()).collect();
        AdamState {
            cfg,
            t: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam update of `net` in place from `grads`.
    ///
    /// With zero moments (first step), the update reduces to
    /// `p -= lr * g / (|g| + eps)`, i.e. a signed step of size ~lr.
    pub fn step(&mut self, net: &mut DenseNet, grads: &NetGrads) -> Result<()> {
        let mut params = net.param_tensors_mut();
        if params.len() != grads.tensors.len() || params.len() != self.m.len() {
            return Err(CoreError::ShapeMismatch {
                context: "AdamState::step",
                expected: (self.m.len(), 0),
                actual: (grads.tensors.len(), 0),
            });
        }
        self.t += 1;
        let b1t = 1.0 - libm::pow(self.cfg.beta1, self.t as f64);
        let b2t = 1.0 - libm::pow(self.cfg.beta2, self.t as f64);
        for (ti, p) in params.iter_mut().enumerate() {
            let g = &grads.tensors[ti];
            if g.len() != p.len() {
                return Err(CoreError::ShapeMismatch {
                    context: "AdamState::step",
                    expected: (p.len(), 1),
                    actual: (g.len(), 1),
                });
            }
            let (m, v) = (&mut self.m[ti], &mut self.v[ti]);
            for i in 0..g.len() {
                let gi = g[i];
                m[i] = self.cfg.beta1 * m[i] + (1.0 - self.cfg.beta1) * gi;
                v[i] = self.cfg.beta2 * v[i] + (1.0 - self.cfg.beta2) * gi * gi;
                let mhat = m[i] / b1t;
                let vhat = v[i] / b2t;
                p[i] -= self.cfg.lr * mhat / (fmath::sqrt(vhat) + self.cfg.eps);
            }
        }
        Ok(())
    }
}

// ------------------------------------------------------------------ snapshots

fn push_floats(out: &mut String, name: &str, vals: &[f64]) -> Result<()> {
    out.push_str(name);
    for &v in vals {
        if !v.is_finite() {
            return Err(CoreError::NonFinite("snapshot"));
        }
        // {:?} prints the shortest decimal that parses back to the same bits.
        let _ = write!(out, " {v:?}");
    }
    out.push('\n');
    Ok(())
}

fn parse_floats(line: &str, name: &str, expect: usize) -> Result<Vec<f64>> {
    let mut it = line.split_whitespace();
    match it.next() {
        Some(tag) if tag == name => {}
        other => {
            return Err(CoreError::Parse(format!(
                "expected '{name}' line, got {other:?}"
            )))
        }
    }
    let vals: core::result::Result<Vec<f64>, _> = it.map(str::parse::<f64>).collect();
    let vals = vals.map_err(|e| CoreError::Parse(format!("bad float in '{name}': {e}")))?;
    if vals.len() != expect {
        return Err(CoreError::Parse(format!(
            "'{name}' expected {expect} values, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

impl DenseNet {
    /// Serialize to the versioned text snapshot format. Floats are written
    /// with shortest round-trip formatting, so `snapshot_from_str` restores
    /// the exact bits.
    pub fn snapshot_to_string(&self) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "densenet v1");
        let _ = writeln!(out, "layers {}", self.layers.len());
        for layer in &self.layers {
            let _ = writeln!(
                out,
                "layer {} {} {} {}",
                layer.out_dim(),
                layer.in_dim(),
                layer.activation.name(),
                if layer.norm.is_some() { "norm" } else { "nonorm" }
            );
            push_floats(&mut out, "w", layer.w.as_slice())?;
            push_floats(&mut out, "b", &layer.b)?;
            if let Some(bn) = &layer.norm {
                push_floats(&mut out, "gamma", &bn.gamma)?;
                push_floats(&mut out, "beta", &bn.beta)?;
                push_floats(&mut out, "rmean", &bn.running_mean)?;
                push_floats(&mut out, "rvar", &bn.running_var)?;
            }
        }
        Ok(out)
    }

    /// Parse a snapshot produced by [`DenseNet::snapshot_to_string`].
    pub fn snapshot_from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let mut next = || {
            lines
                .next()
                .ok_or_else(|| CoreError::Parse("unexpected end of snapshot".into()))
        };
        if next()?.trim() != "densenet v1" {
            return Err(CoreError::Parse("missing 'densenet v1' header".into()));
        }
        let count_line = next()?;
        let n: usize = count_line
            .strip_prefix("layers ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| CoreError::Parse(format!("bad layers line '{count_line}'")))?;
        if n == 0 {
            return Err(CoreError::Parse("snapshot has zero layers".into()));
        }
        let mut layers = Vec::with_capacity(n);
        for _ in 0..n {
            let header = next()?;
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 5 || parts[0] != "layer" {
                return Err(CoreError::Parse(format!("bad layer header '{header}'")));
            }
            let out_dim: usize = parts[1]
                .parse()
                .map_err(|_| CoreError::Parse(format!("bad out dim '{}'", parts[1])))?;
            let in_dim: usize = parts[2]
                .parse()
                .map_err(|_| CoreError::Parse(format!("bad in dim '{}'", parts[2])))?;
            if out_dim == 0 || in_dim == 0 {
                return Err(CoreError::Parse("zero layer dimension".into()));
            }
            let activation = Activation::parse(parts[3])?;
            let has_norm = match parts[4] {
                "norm" => true,
                "nonorm" => false,
                other => return Err(CoreError::Parse(format!("bad norm flag '{other}'"))),
            };
            let w = Matrix::from_vec(
                out_dim,
                in_dim,
                parse_floats(next()?, "w", out_dim * in_dim)?,
            )?;
            let b = parse_floats(next()?, "b", out_dim)?;
            let norm = if has_norm {
                Some(BatchNorm {
                    gamma: parse_floats(next()?, "gamma", out_dim)?,
                    beta: parse_floats(next()?, "beta", out_dim)?,
                    running_mean: parse_floats(next()?, "rmean", out_dim)?,
                    running_var: parse_floats(next()?, "rvar", out_dim)?,
                })
            } else {
                None
            };
            layers.push(Layer {
                w,
                b,
                activation,
                norm,
            });
        }
        // Adjacent layers must chain dimensionally.
        for pair in layers.windows(2) {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(CoreError::Parse("layer dimensions do not chain".into()));
            }
        }
        Ok(DenseNet { layers })
    }
}

// ---------------------------------------------------------------------- tests
