//! Synthetic streams whose sampling distribution drifts gradually in time.
//!
//! Two generators:
//! - [`GaussianWalk`]: a one-dimensional Gaussian whose mean performs a
//!   triangle-wave walk — it moves by `drift / 10` per step and reverses
//!   direction every `flip_period` steps. Labels are the Bayes rule
//!   `y = 1 iff x > mean(t)`, so the optimal decision boundary drifts with
//!   the mean and any model trained on stale data lags after a reversal.
//! - [`LabelShift`]: a `classes`-way problem whose class prior rotates
//!   smoothly around the classes. The prior at step `t` linearly
//!   interpolates between two adjacent peaked distributions over a window
//!   of `steps_per_pair` steps, then advances to the next pair, wrapping
//!   around — so the full schedule has period `classes * steps_per_pair`.
//!   Features are class-conditional spherical Gaussians whose means are
//!   scaled standard basis vectors.

use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::seeding::{self, Rng};

/// One stream observation: draw step, features, and (for labeled tasks) the
/// class index.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedSample {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Option<usize>,
}

// -------------------------------------------------------------- gaussian walk

/// Drifting one-dimensional Gaussian with a triangle-wave mean path.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWalk {
    /// Number of steps; valid step indices are `0..horizon`.
    pub horizon: usize,
    /// Mean at step 0.
    pub mu0: f64,
    /// Total drift scale `d`; the per-step increment is `d / 10`.
    pub drift: f64,
    /// The increment's sign reverses every this many steps.
    pub flip_period: usize,
}

impl GaussianWalk {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(CoreError::InvalidConfig("horizon must be positive".into()));
        }
        if self.flip_period == 0 {
            return Err(CoreError::InvalidConfig(
                "flip_period must be positive".into(),
            ));
        }
        if !self.mu0.is_finite() || !self.drift.is_finite() {
            return Err(CoreError::NonFinite("GaussianWalk config"));
        }
        Ok(())
    }

    fn check_step(&self, t: usize, context: &'static str) -> Result<()> {
        if t >= self.horizon {
            return Err(CoreError::IndexOutOfRange {
                context,
                index: t,
                limit: self.horizon,
            });
        }
        Ok(())
    }

    /// Mean of the sampling distribution at step `t`.
    ///
    /// `mean(0) = mu0`; step `t >= 1` adds `±drift/10`, with sign `+` during
    /// the first `flip_period` increments, `-` during the next, and so on.
    pub fn mean_at(&self, t: usize) -> Result<f64> {
        self.check_step(t, "GaussianWalk::mean_at")?;
        let mut mu = self.mu0;
        let step = self.drift / 10.0;
        for k in 1..=t {
            let block = (k - 1) / self.flip_period;
            mu += if block % 2 == 0 { step } else { -step };
        }
        Ok(mu)
    }

    /// Draw `n` labeled samples from step `t`: `x ~ N(mean(t), 1)`,
    /// `y = 1 iff x > mean(t)`.
    pub fn generate_step(&self, t: usize, n: usize, rng: &mut Rng) -> Result<Vec<TimedSample>> {
        self.check_step(t, "GaussianWalk::generate_step")?;
        if n == 0 {
            return Err(CoreError::Degenerate("GaussianWalk::generate_step"));
        }
        let mu = self.mean_at(t)?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(rng);
            let x = mu + z;
            out.push(TimedSample {
                t,
                x: vec![x],
                y: Some(usize::from(x > mu)),
            });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------- label shift

/// Rotating class-prior schedule over fixed class-conditional Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelShift {
    /// Number of steps; valid step indices are `0..horizon`.
    pub horizon: usize,
    /// Number of classes `C`.
    pub classes: usize,
    /// Steps spent interpolating between one pair of adjacent priors.
    pub steps_per_pair: usize,
    /// Feature dimension; must be at least `classes` so each class can own
    /// one basis direction.
    pub feature_dim: usize,
    /// Probability mass the peaked prior puts on its own class; the rest is
    /// spread uniformly over the other classes.
    pub peak_mass: f64,
    /// Distance of each class mean from the origin along its basis vector.
    pub class_separation: f64,
}

impl LabelShift {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(CoreError::InvalidConfig("horizon must be positive".into()));
        }
        if self.classes < 2 {
            return Err(CoreError::InvalidConfig("need at least 2 classes".into()));
        }
        if self.steps_per_pair == 0 {
            return Err(CoreError::InvalidConfig(
                "steps_per_pair must be positive".into(),
            ));
        }
        if self.feature_dim < self.classes {
            return Err(CoreError::InvalidConfig(
                "feature_dim must be >= classes (one basis direction per class)".into(),
            ));
        }
        if !(self.peak_mass > 0.0 && self.peak_mass < 1.0) {
            return Err(CoreError::OutOfRange {
                context: "LabelShift peak_mass",
                value: self.peak_mass,
            });
        }
        if !(self.class_separation.is_finite() && self.class_separation > 0.0) {
            return Err(CoreError::OutOfRange {
                context: "LabelShift class_separation",
                value: self.class_separation,
            });
        }
        Ok(())
    }

    fn check_step(&self, t: usize, context: &'static str) -> Result<()> {
        if t >= self.horizon {
            return Err(CoreError::IndexOutOfRange {
                context,
                index: t,
                limit: self.horizon,
            });
        }
        Ok(())
    }

    /// The peaked prior centered on class `i`.
    fn peaked(&self, i: usize) -> Vec<f64> {
        let off = (1.0 - self.peak_mass) / (self.classes - 1) as f64;
        let mut q = vec![off; self.classes];
        q[i] = self.peak_mass;
        q
    }

    /// Class prior at step `t`: with `i = (t / steps_per_pair) mod C` and
    /// `o = t mod steps_per_pair`, returns
    /// `(1 - o/steps_per_pair) * peaked(i) + (o/steps_per_pair) * peaked(i+1)`,
    /// indices wrapping mod `C`. Exactly periodic with period
    /// `C * steps_per_pair`.
    pub fn class_probs(&self, t: usize) -> Result<Vec<f64>> {
        self.check_step(t, "LabelShift::class_probs")?;
        let i = (t / self.steps_per_pair) % self.classes;
        let o = t % self.steps_per_pair;
        let w = o as f64 / self.steps_per_pair as f64;
        let qa = self.peaked(i);
        let qb = self.peaked((i + 1) % self.classes);
        Ok(qa
            .iter()
            .zip(qb.iter())
            .map(|(&a, &b)| (1.0 - w) * a + w * b)
            .collect())
    }

    /// Mean vector of class `c`: `class_separation * e_c`.
    pub fn class_mean(&self, c: usize) -> Result<Vec<f64>> {
        if c >= self.classes {
            return Err(CoreError::IndexOutOfRange {
                context: "LabelShift::class_mean",
                index: c,
                limit: self.classes,
            });
        }
        let mut m = vec![0.0; self.feature_dim];
        m[c] = self.class_separation;
        Ok(m)
    }

    /// Draw `n` labeled samples from step `t`: `y ~ class_probs(t)`,
    /// `x ~ N(class_mean(y), I)`.
    pub fn generate_step(&self, t: usize, n: usize, rng: &mut Rng) -> Result<Vec<TimedSample>> {
        self.check_step(t, "LabelShift::generate_step")?;
        if n == 0 {
            return Err(CoreError::Degenerate("LabelShift::generate_step"));
        }
        let probs = self.class_probs(t)?;
        let cat = WeightedIndex::new(&probs)
            .map_err(|_| CoreError::NonFinite("LabelShift::generate_step weights"))?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let y = cat.sample(rng);
            let mut x = self.class_mean(y)?;
            for v in &mut x {
                let z: f64 = StandardNormal.sample(rng);
                *v += z;
            }
            out.push(TimedSample { t, x, y: Some(y) });
        }
        Ok(out)
    }
}

// ------------------------------------------------------------------- schedule

/// Either drifting-stream generator behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSchedule {
    GaussianWalk(GaussianWalk),
    LabelShift(LabelShift),
}

impl DriftSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            DriftSchedule::GaussianWalk(g) => g.validate(),
            DriftSchedule::LabelShift(l) => l.validate(),
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            DriftSchedule::GaussianWalk(g) => g.horizon,
            DriftSchedule::LabelShift(l) => l.horizon,
        }
    }

    pub fn feature_dim(&self) -> usize {
        match self {
            DriftSchedule::GaussianWalk(_) => 1,
            DriftSchedule::LabelShift(l) => l.feature_dim,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            DriftSchedule::GaussianWalk(_) => 2,
            DriftSchedule::LabelShift(l) => l.classes,
        }
    }

    /// Draw `n` labeled samples from the distribution at step `t`.
    pub fn generate_step(&self, t: usize, n: usize, rng: &mut Rng) -> Result<Vec<TimedSample>> {
        match self {
            DriftSchedule::GaussianWalk(g) => g.generate_step(t, n, rng),
            DriftSchedule::LabelShift(l) => l.generate_step(t, n, rng),
        }
    }

    /// Fresh evaluation set from step `t` — the same distribution the
    /// stream draws from, sampled independently of the training stream.
    pub fn test_set_at(&self, t: usize, n: usize, rng: &mut Rng) -> Result<Vec<TimedSample>> {
        self.generate_step(t, n, rng)
    }

    /// Generate the full training stream: `n_per_step` samples at every step
    /// `0..horizon`, concatenated in time order.
    ///
    /// Each step draws from its own child RNG
    /// (`child_seed(master, "gen", [t])`), so a step's samples do not depend
    /// on the horizon or on other steps.
    pub fn generate_stream(&self, n_per_step: usize, master_seed: u64) -> Result<Vec<TimedSample>> {
        self.validate()?;
        let mut out = Vec::with_capacity(n_per_step * self.horizon());
        for t in 0..self.horizon() {
            let mut rng = seeding::child_rng(master_seed, "gen", &[t as u64]);
            out.extend(self.generate_step(t, n_per_step, &mut rng)?);
        }
        Ok(out)
    }
}

/// Borrow the samples with `t <= cutoff` (the "history" a model may train
/// on at step `cutoff`). Assumes `stream` is in time order, as produced by
/// [`DriftSchedule::generate_stream`].
pub fn history<'a>(stream: &'a [TimedSample], cutoff: usize) -> &'a [TimedSample] {
    let end = stream.partition_point(|s| s.t <= cutoff);
    &stream[..end]
}

/// Borrow the samples with exactly `t == step`.
pub fn at_step<'a>(stream: &'a [TimedSample], step: usize) -> &'a [TimedSample] {
    let start = stream.partition_point(|s| s.t < step);
    let end = stream.partition_point(|s| s.t <= step);
    &stream[start..end]
}
