//! Off-policy TD learning on a gridworld with a drifting reward.
//!
//! The goal cell walks around the border of the grid, one cell per episode,
//! so the reward function seen by a replay buffer is nonstationary: stored
//! transitions carry rewards from old goal positions. Plain replay TD mixes
//! all of them equally; the weighted update scales each sampled transition
//! by the importance weight `omega(s, a, T, t)` of its (state, action) pair
//! between its collection episode `t` and the current episode `T`, so stale
//! phases count less. With weights pinned to one, the weighted path is the
//! standard update, bit for bit.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::drift::TimedSample;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::omega::{self, OmegaEstimator, OmegaSpec, OmegaTrainConfig};
use crate::seeding::{self, Rng};
use crate::trainers::argmax;

/// One step of experience. `t` stamps the collection episode, not the
/// environment step, and is what the weight estimator conditions on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub s: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
    pub t: usize,
    pub done: bool,
}

pub const ACTIONS: usize = 4; // up, down, left, right

/// Gridworld whose goal cell follows a cyclic schedule, one schedule entry
/// per episode.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftGrid {
    pub width: usize,
    pub height: usize,
    /// Goal cell per episode phase; `goal_at(e) = cycle[e % len]`.
    pub goal_cycle: Vec<usize>,
    pub step_penalty: f64,
    pub goal_reward: f64,
    /// Episodes truncate (without a terminal flag) after this many steps.
    pub episode_cap: usize,
}

impl DriftGrid {
    /// Goal walks the border ring clockwise from the top-left corner, one
    /// cell per episode. A 6x6 grid gives the 20-cell ring, period 20.
    pub fn drifting_border(width: usize, height: usize) -> Self {
        let mut ring = Vec::new();
        for c in 0..width {
            ring.push(c); // top row, left to right
        }
        for r in 1..height {
            ring.push(r * width + (width - 1)); // right column, downward
        }
        for c in (0..width - 1).rev() {
            ring.push((height - 1) * width + c); // bottom row, right to left
        }
        for r in (1..height - 1).rev() {
            ring.push(r * width); // left column, upward
        }
        DriftGrid {
            width,
            height,
            goal_cycle: ring,
            step_penalty: -1.0,
            goal_reward: 10.0,
            episode_cap: 50,
        }
    }

    /// Goal switches between two cells in repeating patterns: `dwell`
    /// episodes at `a`, then `dwell` at `b` (period `2 * dwell`). Stored
    /// rewards from the other dwell are exactly the stale data an
    /// importance-weighted replay should suppress.
    pub fn alternating(width: usize, height: usize, a: usize, b: usize, dwell: usize) -> Self {
        let mut cycle = alloc::vec![a; dwell];
        cycle.extend(core::iter::repeat(b).take(dwell));
        DriftGrid {
            goal_cycle: cycle,
            ..DriftGrid::drifting_border(width, height)
        }
    }

    /// Control environment: the same grid with the goal pinned to one cell.
    pub fn stationary(width: usize, height: usize, goal: usize) -> Self {
        DriftGrid {
            goal_cycle: alloc::vec![goal],
            ..DriftGrid::drifting_border(width, height)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(CoreError::InvalidConfig("grid must be at least 2x2".into()));
        }
        if self.goal_cycle.is_empty() {
            return Err(CoreError::InvalidConfig("empty goal cycle".into()));
        }
        if let Some(&g) = self.goal_cycle.iter().find(|&&g| g >= self.n_states()) {
            return Err(CoreError::IndexOutOfRange {
                context: "goal cell",
                index: g,
                limit: self.n_states(),
            });
        }
        if self.episode_cap == 0 {
            return Err(CoreError::InvalidConfig("episode cap must be positive".into()));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.width * self.height
    }

    /// Schedule period: the goal position repeats every this many episodes.
    pub fn period(&self) -> usize {
        self.goal_cycle.len()
    }

    pub fn goal_at(&self, episode: usize) -> usize {
        self.goal_cycle[episode % self.goal_cycle.len()]
    }

    /// Episode start state: the center cell.
    pub fn start_state(&self) -> usize {
        (self.height / 2) * self.width + self.width / 2
    }

    /// Concatenated one-hot state and one-hot action — the weight
    /// estimator's input for a (state, action) pair.
    pub fn sa_features(&self, s: usize, a: usize) -> Vec<f64> {
        let mut x = alloc::vec![0.0; self.n_states() + ACTIONS];
        x[s] = 1.0;
        x[self.n_states() + a] = 1.0;
        x
    }

    pub fn feature_dim(&self) -> usize {
        self.n_states() + ACTIONS
    }
}

/// Deterministic environment step. Moves clip at the walls; arriving at the
/// episode's goal cell pays `goal_reward` and terminates, any other step
/// pays `step_penalty`. Episode truncation at the step cap is the rollout
/// loop's job — the step itself is stateless.
pub fn env_step(
    grid: &DriftGrid,
    state: usize,
    action: usize,
    episode: usize,
) -> Result<(usize, f64, bool)> {
    if state >= grid.n_states() {
        return Err(CoreError::IndexOutOfRange {
            context: "env_step state",
            index: state,
            limit: grid.n_states(),
        });
    }
    if action >= ACTIONS {
        return Err(CoreError::IndexOutOfRange {
            context: "env_step action",
            index: action,
            limit: ACTIONS,
        });
    }
    let (r, c) = (state / grid.width, state % grid.width);
    let (nr, nc) = match action {
        0 => (r.saturating_sub(1), c),                     // up
        1 => ((r + 1).min(grid.height - 1), c),            // down
        2 => (r, c.saturating_sub(1)),                     // left
        _ => (r, (c + 1).min(grid.width - 1)),             // right
    };
    let next = nr * grid.width + nc;
    if next == grid.goal_at(episode) {
        Ok((next, grid.goal_reward, true))
    } else {
        Ok((next, grid.step_penalty, false))
    }
}

// ------------------------------------------------------------------- replay

/// FIFO experience store with bounded capacity and nondecreasing episode
/// stamps.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            items: VecDeque::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Append a transition, evicting the oldest when full. Stamps must be
    /// nondecreasing in insertion order.
    pub fn push(&mut self, tr: Transition) -> Result<()> {
        if let Some(last) = self.items.back() {
            if tr.t < last.t {
                return Err(CoreError::OutOfRange {
                    context: "ReplayBuffer stamps must be nondecreasing",
                    value: tr.t as f64,
                });
            }
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(tr);
        Ok(())
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Vec<Transition>> {
        if self.items.is_empty() {
            return Err(CoreError::Degenerate("sampling an empty replay buffer"));
        }
        Ok((0..n)
            .map(|_| self.items[rng.gen_range(0..self.items.len())])
            .collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// The buffer as a time-stamped stream of (state, action) features,
    /// the estimator's training set.
    pub fn timed_samples(&self, grid: &DriftGrid) -> Vec<TimedSample> {
        self.items
            .iter()
            .map(|tr| TimedSample {
                t: tr.t,
                x: grid.sa_features(tr.s, tr.a),
                y: None,
            })
            .collect()
    }
}

// ----------------------------------------------------------------- Q-table

/// Tabular action-value function with a soft-updated target copy.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    online: Matrix,
    target: Matrix,
    pub gamma: f64,
    pub tau: f64,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize, gamma: f64, tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(CoreError::OutOfRange {
                context: "QTable gamma",
                value: gamma,
            });
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(CoreError::OutOfRange {
                context: "QTable tau",
                value: tau,
            });
        }
        Ok(QTable {
            online: Matrix::zeros(n_states, n_actions),
            target: Matrix::zeros(n_states, n_actions),
            gamma,
            tau,
        })
    }

    pub fn online(&self) -> &Matrix {
        &self.online
    }

    pub fn target(&self) -> &Matrix {
        &self.target
    }

    pub fn greedy_action(&self, state: usize) -> usize {
        argmax(self.online.row(state))
    }

    fn target_max(&self, state: usize) -> f64 {
        self.target
            .row(state)
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// One gradient step on the mean of `w_i * delta_i^2` over the batch,
    /// where `delta = Q(s,a) - (r + gamma * max_a' Qtarget(s',a'))` and the
    /// bootstrap term drops on terminal transitions. Ends with the
    /// `tau`-blend of the target toward the online table. Returns the
    /// pre-update loss.
    pub fn td_batch(
        &mut self,
        batch: &[Transition],
        weights: Option<&[f64]>,
        alpha: f64,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(CoreError::Degenerate("td_batch: empty batch"));
        }
        if let Some(w) = weights {
            if w.len() != batch.len() {
                return Err(CoreError::ShapeMismatch {
                    context: "td_batch weights",
                    expected: (batch.len(), 1),
                    actual: (w.len(), 1),
                });
            }
        }
        let b = batch.len() as f64;
        let mut grad = Matrix::zeros(self.online.rows(), self.online.cols());
        let mut loss = 0.0;
        for (i, tr) in batch.iter().enumerate() {
            if tr.s >= self.online.rows() || tr.s_next >= self.online.rows() {
                return Err(CoreError::IndexOutOfRange {
                    context: "td_batch state",
                    index: tr.s.max(tr.s_next),
                    limit: self.online.rows(),
                });
            }
            if tr.a >= self.online.cols() {
                return Err(CoreError::IndexOutOfRange {
                    context: "td_batch action",
                    index: tr.a,
                    limit: self.online.cols(),
                });
            }
            let bootstrap = if tr.done {
                0.0
            } else {
                self.gamma * self.target_max(tr.s_next)
            };
            let delta = self.online.get(tr.s, tr.a) - (tr.r + bootstrap);
            let wd = match weights {
                None => delta,
                Some(w) => w[i] * delta,
            };
            loss += wd * delta;
            grad.set(tr.s, tr.a, grad.get(tr.s, tr.a) + wd / b);
        }
        for (q, g) in self
            .online
            .as_mut_slice()
            .iter_mut()
            .zip(grad.as_slice().iter())
        {
            *q -= alpha * g;
        }
        self.soft_update();
        Ok(loss / b)
    }

    /// `target <- (1 - tau) * target + tau * online`, elementwise.
    fn soft_update(&mut self) {
        for (t, q) in self
            .target
            .as_mut_slice()
            .iter_mut()
            .zip(self.online.as_slice().iter())
        {
            *t = (1.0 - self.tau) * *t + self.tau * *q;
        }
    }
}

/// Plain replay TD step.
pub fn td_update(q: &mut QTable, batch: &[Transition], alpha: f64) -> Result<f64> {
    q.td_batch(batch, None, alpha)
}

/// The importance weights the weighted update applies to a batch at the
/// current episode `t_now`: `omega` of each transition's (s, a) features
/// between its stamp and now.
pub fn omega_weights(
    est: &OmegaEstimator,
    grid: &DriftGrid,
    batch: &[Transition],
    t_now: usize,
) -> Result<Vec<f64>> {
    let samples: Vec<TimedSample> = batch
        .iter()
        .map(|tr| TimedSample {
            t: tr.t,
            x: grid.sa_features(tr.s, tr.a),
            y: None,
        })
        .collect();
    est.weights_at(&samples, t_now)
}

/// Replay TD step with each transition scaled by
/// `omega(s, a, t_now, t)`. The estimator must already be trained.
pub fn weighted_td_update(
    q: &mut QTable,
    batch: &[Transition],
    est: &OmegaEstimator,
    grid: &DriftGrid,
    t_now: usize,
    alpha: f64,
) -> Result<f64> {
    if !est.is_trained() {
        return Err(CoreError::Untrained("weighted_td_update"));
    }
    let w = omega_weights(est, grid, batch, t_now)?;
    q.td_batch(batch, Some(&w), alpha)
}

// ----------------------------------------------------------------- rollouts

/// One epsilon-greedy episode from the center cell. Every transition is
/// appended to `buffer` with `t = episode`; the return is the undiscounted
/// reward sum. Episodes truncate after `grid.episode_cap` steps.
pub fn collect_episode(
    grid: &DriftGrid,
    q: &QTable,
    epsilon: f64,
    episode: usize,
    rng: &mut Rng,
    buffer: &mut ReplayBuffer,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(CoreError::OutOfRange {
            context: "collect_episode epsilon",
            value: epsilon,
        });
    }
    let mut state = grid.start_state();
    let mut ret = 0.0;
    for _ in 0..grid.episode_cap {
        let a = if rng.gen::<f64>() < epsilon {
            rng.gen_range(0..ACTIONS)
        } else {
            q.greedy_action(state)
        };
        let (next, r, done) = env_step(grid, state, a, episode)?;
        buffer.push(Transition {
            s: state,
            a,
            r,
            s_next: next,
            t: episode,
            done,
        })?;
        ret += r;
        state = next;
        if done {
            break;
        }
    }
    Ok(ret)
}

/// Greedy evaluation rollout — no exploration, nothing stored.
pub fn greedy_return(grid: &DriftGrid, q: &QTable, episode: usize) -> Result<f64> {
    let mut state = grid.start_state();
    let mut ret = 0.0;
    for _ in 0..grid.episode_cap {
        let (next, r, done) = env_step(grid, state, q.greedy_action(state), episode)?;
        ret += r;
        state = next;
        if done {
            break;
        }
    }
    Ok(ret)
}

// --------------------------------------------------------------- experiment

/// How the TD update weights replayed transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Plain uniform replay.
    Unweighted,
    /// Scale by the trained estimator's `omega(s, a, T, t)`.
    Omega,
    /// The weighted code path with every weight pinned to 1 — a diagnostic
    /// mode whose trajectories must match [`Weighting::Unweighted`] exactly.
    UnitOmega,
}

/// Full experiment configuration for [`run_rl_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct RlConfig {
    pub grid: DriftGrid,
    pub weighting: Weighting,
    pub episodes: usize,
    /// Initial uniform-random episodes collected before any update.
    pub burn_in: usize,
    pub batch_size: usize,
    pub updates_per_episode: usize,
    /// Tabular TD step size.
    pub alpha: f64,
    pub gamma: f64,
    /// Target soft-update rate.
    pub tau: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episodes (after burn-in) over which epsilon decays linearly.
    pub epsilon_decay_episodes: usize,
    pub buffer_capacity: usize,
    /// Weight-estimator architecture (feature input is one-hot (s, a)).
    pub omega: OmegaSpec,
    /// Retrain the estimator every this many episodes after burn-in.
    pub refresh_every: usize,
    /// Training epochs per refresh (warm-started between refreshes).
    pub refresh_epochs: usize,
    pub omega_batch: usize,
    pub omega_lr: f64,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            // Opposite corners, ten episodes each: period 20. Tabular TD can
            // master either goal but plain replay mixes the two phases'
            // contradictory rewards; per-episode goal creep (see
            // `drifting_border`) is beyond any state-only table.
            grid: DriftGrid::alternating(6, 6, 0, 35, 10),
            weighting: Weighting::Omega,
            episodes: 300,
            burn_in: 20,
            batch_size: 256,
            updates_per_episode: 10,
            alpha: 1.0,
            gamma: 0.99,
            tau: 0.05,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_episodes: 100,
            buffer_capacity: 1_000_000,
            // Six sinusoid pairs: the encoding must resolve the goal period
            // (20 episodes out of hundreds), which the default four cannot.
            omega: OmegaSpec {
                frequencies: 6,
                ..OmegaSpec::default()
            },
            refresh_every: 10,
            refresh_epochs: 4,
            omega_batch: 256,
            omega_lr: 1e-3,
        }
    }
}

impl RlConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.episodes == 0
            || self.batch_size == 0
            || self.refresh_every == 0
            || self.buffer_capacity == 0
        {
            return Err(CoreError::InvalidConfig(
                "episodes, batch_size, refresh_every, buffer_capacity must be positive".into(),
            ));
        }
        if self.burn_in + 2 > self.episodes {
            return Err(CoreError::InvalidConfig(
                "need at least two post-burn-in episodes".into(),
            ));
        }
        for (name, v) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::InvalidConfig(alloc::format!(
                    "{name} must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }

    fn epsilon_at(&self, episode: usize) -> f64 {
        if episode < self.burn_in {
            return 1.0;
        }
        if self.epsilon_decay_episodes == 0 {
            return self.epsilon_end;
        }
        let progress =
            (episode - self.burn_in) as f64 / self.epsilon_decay_episodes as f64;
        if progress >= 1.0 {
            self.epsilon_end
        } else {
            self.epsilon_start + (self.epsilon_end - self.epsilon_start) * progress
        }
    }
}

/// One per-episode record of a learning curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlCurvePoint {
    pub episode: usize,
    /// Undiscounted return of a greedy rollout at this episode's goal.
    pub eval_return: f64,
    pub buffer_size: usize,
    /// Mean importance weight applied this episode (1 when unweighted or no
    /// updates ran).
    pub mean_omega: f64,
}

/// Run one seed: interleaves collection, estimator refreshes, and TD
/// updates; greedy evaluation after each episode.
pub fn run_rl_seed(cfg: &RlConfig, seed: u64) -> Result<Vec<RlCurvePoint>> {
    cfg.validate()?;
    let grid = &cfg.grid;
    let mut q = QTable::new(grid.n_states(), ACTIONS, cfg.gamma, cfg.tau)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut collect_rng = seeding::child_rng(seed, "rl-collect", &[]);
    let mut sample_rng = seeding::child_rng(seed, "rl-sample", &[]);
    let mut est = match cfg.weighting {
        Weighting::Omega => Some(OmegaEstimator::init(
            grid.feature_dim(),
            cfg.episodes,
            &cfg.omega,
            &mut seeding::child_rng(seed, "rl-omega-init", &[]),
        )?),
        _ => None,
    };
    let mut train_rng = seeding::child_rng(seed, "rl-omega-train", &[]);
    let refresh_cfg = OmegaTrainConfig {
        epochs: cfg.refresh_epochs,
        batch_size: cfg.omega_batch,
        lr: cfg.omega_lr,
        holdout_frac: 0.0,
        regenerate_each_epoch: true,
    };

    let mut curve = Vec::with_capacity(cfg.episodes);
    for episode in 0..cfg.episodes {
        let eps = cfg.epsilon_at(episode);
        collect_episode(grid, &q, eps, episode, &mut collect_rng, &mut buffer)?;

        let mut omega_sum = 0.0;
        let mut omega_n = 0usize;
        if episode >= cfg.burn_in {
            if let Some(est) = est.as_mut() {
                if (episode - cfg.burn_in) % cfg.refresh_every == 0 {
                    let samples = buffer.timed_samples(grid);
                    omega::train(est, &samples, &refresh_cfg, &mut train_rng)?;
                }
            }
            for _ in 0..cfg.updates_per_episode {
                let batch = buffer.sample(cfg.batch_size, &mut sample_rng)?;
                match (cfg.weighting, est.as_ref()) {
                    (Weighting::Unweighted, _) => {
                        q.td_batch(&batch, None, cfg.alpha)?;
                    }
                    (Weighting::UnitOmega, _) => {
                        let ones = alloc::vec![1.0; batch.len()];
                        omega_sum += ones.iter().sum::<f64>();
                        omega_n += ones.len();
                        q.td_batch(&batch, Some(&ones), cfg.alpha)?;
                    }
                    (Weighting::Omega, Some(est)) => {
                        let w = omega_weights(est, grid, &batch, episode)?;
                        omega_sum += w.iter().sum::<f64>();
                        omega_n += w.len();
                        q.td_batch(&batch, Some(&w), cfg.alpha)?;
                    }
                    (Weighting::Omega, None) => unreachable!("estimator built above"),
                }
            }
        }

        curve.push(RlCurvePoint {
            episode,
            eval_return: greedy_return(grid, &q, episode)?,
            buffer_size: buffer.len(),
            mean_omega: if omega_n == 0 {
                1.0
            } else {
                omega_sum / omega_n as f64
            },
        });
    }
    Ok(curve)
}

/// Run every seed independently; returns one learning curve per seed.
pub fn run_rl_experiment(cfg: &RlConfig, seeds: &[u64]) -> Result<Vec<Vec<RlCurvePoint>>> {
    if seeds.is_empty() {
        return Err(CoreError::InvalidConfig("need at least one seed".into()));
    }
    seeds.iter().map(|&s| run_rl_seed(cfg, s)).collect()
}
