//! Experiment configuration: a TOML file with one section per concern.
//!
//! Every field has a default, so an empty file (or no file at all) is a
//! complete, runnable configuration. Parsing is strict — unknown keys are
//! rejected — and `validate` runs every semantic check up front so commands
//! fail before they write anything.
//!
//! A canonical serialization (field order fixed by the structs below) feeds
//! the config hash recorded in output manifests; formatting and comments in
//! the source file do not affect it.
//!
//! Convention for optional positive scalars (`clip`, `bandwidth`): `0` means
//! "disabled"/"automatic", since the TOML format has no null.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use driftweight_core::drift::{DriftSchedule, GaussianWalk, LabelShift};
use driftweight_core::omega::{BetaTrainConfig, Method, OmegaSpec, OmegaTrainConfig};
use driftweight_core::rl::{DriftGrid, RlConfig, Weighting};
use driftweight_core::seeding;
use driftweight_core::trainers::TaskTrainConfig;

use crate::error::{CliError, Result};

// ------------------------------------------------------------------ sections

/// Global run settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Output directory; every command writes beneath it.
    pub out_dir: String,
    /// Master seed; all randomness is derived from it.
    pub seed: u64,
    /// Worker threads for per-seed work items.
    pub jobs: usize,
    /// Training samples drawn per stream step.
    pub samples_per_step: usize,
    /// Fresh evaluation samples per tested step.
    pub test_samples: usize,
    /// Replicate seeds for benchmark and RL runs.
    pub seeds: Vec<u64>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out_dir: "out".into(),
            seed: 7,
            jobs: 1,
            samples_per_step: 500,
            test_samples: 1000,
            seeds: vec![0, 1, 2],
        }
    }
}

/// Which drifting data stream to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSection {
    /// One-dimensional Gaussian whose mean walks a triangle wave.
    GaussianWalk {
        #[serde(default = "default_horizon")]
        horizon: usize,
        #[serde(default)]
        mu0: f64,
        #[serde(default = "default_drift")]
        drift: f64,
        #[serde(default = "default_flip_period")]
        flip_period: usize,
    },
    /// Fixed class-conditional Gaussians under rotating class priors.
    LabelShift {
        #[serde(default = "default_ls_horizon")]
        horizon: usize,
        #[serde(default = "default_classes")]
        classes: usize,
        #[serde(default = "default_steps_per_pair")]
        steps_per_pair: usize,
        #[serde(default = "default_feature_dim")]
        feature_dim: usize,
        #[serde(default = "default_peak_mass")]
        peak_mass: f64,
        #[serde(default = "default_class_separation")]
        class_separation: f64,
    },
}

fn default_horizon() -> usize {
    40
}
fn default_drift() -> f64 {
    2.0
}
fn default_flip_period() -> usize {
    10
}
fn default_ls_horizon() -> usize {
    6
}
fn default_classes() -> usize {
    10
}
fn default_steps_per_pair() -> usize {
    1
}
fn default_feature_dim() -> usize {
    10
}
fn default_peak_mass() -> f64 {
    0.55
}
fn default_class_separation() -> f64 {
    2.0
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection::GaussianWalk {
            horizon: default_horizon(),
            mu0: 0.0,
            drift: default_drift(),
            flip_period: default_flip_period(),
        }
    }
}

impl ScheduleSection {
    /// Build the core schedule this section describes.
    pub fn to_core(&self) -> DriftSchedule {
        match *self {
            ScheduleSection::GaussianWalk {
                horizon,
                mu0,
                drift,
                flip_period,
            } => DriftSchedule::GaussianWalk(GaussianWalk {
                horizon,
                mu0,
                drift,
                flip_period,
            }),
            ScheduleSection::LabelShift {
                horizon,
                classes,
                steps_per_pair,
                feature_dim,
                peak_mass,
                class_separation,
            } => DriftSchedule::LabelShift(LabelShift {
                horizon,
                classes,
                steps_per_pair,
                feature_dim,
                peak_mass,
                class_separation,
            }),
        }
    }
}

/// Importance-weight estimator: architecture and training loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaSection {
    /// Loss variant: "method1" or "method2".
    pub method: String,
    pub hidden: Vec<usize>,
    pub batchnorm: bool,
    /// Sinusoid pairs in the time encoding.
    pub frequencies: usize,
    /// Weight cap; 0 disables clipping.
    pub clip: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Stream fraction held out for the training report.
    pub holdout_frac: f64,
    /// Redraw contrast pairs every epoch.
    pub regenerate_each_epoch: bool,
}

impl Default for OmegaSection {
    fn default() -> Self {
        let spec = OmegaSpec::default();
        let train = OmegaTrainConfig::default();
        OmegaSection {
            method: Method::Method1.name().into(),
            hidden: spec.hidden,
            batchnorm: spec.batchnorm,
            frequencies: spec.frequencies,
            clip: spec.clip.unwrap_or(0.0),
            epochs: train.epochs,
            batch_size: train.batch_size,
            lr: train.lr,
            holdout_frac: train.holdout_frac,
            regenerate_each_epoch: train.regenerate_each_epoch,
        }
    }
}

impl OmegaSection {
    pub fn method(&self) -> Result<Method> {
        Method::parse(&self.method).map_err(CliError::from)
    }

    /// Architecture spec, optionally overriding the loss variant.
    pub fn to_spec(&self, method: Option<Method>) -> Result<OmegaSpec> {
        let method = match method {
            Some(m) => m,
            None => self.method()?,
        };
        Ok(OmegaSpec {
            hidden: self.hidden.clone(),
            batchnorm: self.batchnorm,
            frequencies: self.frequencies,
            method,
            clip: positive_or_none(self.clip),
        })
    }

    pub fn to_train_config(&self) -> OmegaTrainConfig {
        OmegaTrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            holdout_frac: self.holdout_frac,
            regenerate_each_epoch: self.regenerate_each_epoch,
        }
    }

    fn validate(&self) -> Result<()> {
        self.method()?;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(CliError::validation(
                "[omega] epochs and batch_size must be positive",
            ));
        }
        check_nonneg_finite("[omega] clip", self.clip)?;
        check_positive_finite("[omega] lr", self.lr)?;
        if !(0.0..1.0).contains(&self.holdout_frac) {
            return Err(CliError::validation(
                "[omega] holdout_frac must lie in [0, 1)",
            ));
        }
        Ok(())
    }
}

/// Downstream task model (the classifier whose accuracy is benchmarked).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let cfg = TaskTrainConfig::default();
        ModelSection {
            hidden: cfg.hidden,
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            lr: cfg.lr,
        }
    }
}

impl ModelSection {
    pub fn to_core(&self) -> TaskTrainConfig {
        TaskTrainConfig {
            hidden: self.hidden.clone(),
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(CliError::validation(
                "[model] epochs and batch_size must be positive",
            ));
        }
        check_positive_finite("[model] lr", self.lr)
    }
}

/// Standard (time-free) propensity classifier used as a baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaSection {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Weight cap; 0 disables clipping.
    pub clip: f64,
}

impl Default for BetaSection {
    fn default() -> Self {
        let cfg = BetaTrainConfig::default();
        BetaSection {
            hidden: cfg.hidden,
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            lr: cfg.lr,
            clip: cfg.clip.unwrap_or(0.0),
        }
    }
}

impl BetaSection {
    pub fn to_core(&self) -> BetaTrainConfig {
        BetaTrainConfig {
            hidden: self.hidden.clone(),
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            clip: positive_or_none(self.clip),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(CliError::validation(
                "[beta] epochs and batch_size must be positive",
            ));
        }
        check_nonneg_finite("[beta] clip", self.clip)?;
        check_positive_finite("[beta] lr", self.lr)
    }
}

/// Benchmark arms and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    /// Training protocols to compare; see `bench::Protocol::parse`.
    pub protocols: Vec<String>,
    /// "inline" regenerates streams per replicate seed; "files" reads the
    /// stream files `gen` wrote (one shared stream for every replicate).
    pub stream_source: String,
    /// Emit an accuracy-vs-step chart next to the CSVs.
    pub svg: bool,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            protocols: vec![
                "everything".into(),
                "recent".into(),
                "finetune".into(),
                "omega_weighted".into(),
            ],
            stream_source: "inline".into(),
            svg: true,
        }
    }
}

impl BenchmarkSection {
    fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(CliError::validation(
                "[benchmark] protocols must not be empty",
            ));
        }
        for p in &self.protocols {
            crate::bench::Protocol::parse(p)?;
        }
        match self.stream_source.as_str() {
            "inline" | "files" => Ok(()),
            other => Err(CliError::validation(format!(
                "[benchmark] stream_source must be 'inline' or 'files', got '{other}'"
            ))),
        }
    }
}

/// Drifting-gridworld reinforcement-learning experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlSection {
    /// Goal motion: "alternating", "border_ring", or "stationary".
    pub drift: String,
    pub width: usize,
    pub height: usize,
    /// First goal cell for the alternating schedule.
    pub goal_a: usize,
    /// Second goal cell for the alternating schedule.
    pub goal_b: usize,
    /// Episodes spent at each alternating goal; the period is `2 * dwell`.
    pub dwell: usize,
    /// Goal cell for the stationary schedule.
    pub stationary_goal: usize,
    /// Weighting of the non-baseline arm: "omega" or "unit" (every weight
    /// pinned to 1 — a diagnostic that must match the baseline exactly).
    pub weighting: String,
    pub episodes: usize,
    pub burn_in: usize,
    pub batch_size: usize,
    pub updates_per_episode: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_episodes: usize,
    pub buffer_capacity: usize,
    /// Sinusoid pairs in the weight estimator's episode encoding.
    pub frequencies: usize,
    pub refresh_every: usize,
    pub refresh_epochs: usize,
    pub omega_batch: usize,
    pub omega_lr: f64,
    /// Emit a mean-return chart next to the CSVs.
    pub svg: bool,
}

impl Default for RlSection {
    fn default() -> Self {
        let cfg = RlConfig::default();
        RlSection {
            drift: "alternating".into(),
            width: cfg.grid.width,
            height: cfg.grid.height,
            goal_a: 0,
            goal_b: 35,
            dwell: 10,
            stationary_goal: 35,
            weighting: "omega".into(),
            episodes: cfg.episodes,
            burn_in: cfg.burn_in,
            batch_size: cfg.batch_size,
            updates_per_episode: cfg.updates_per_episode,
            alpha: cfg.alpha,
            gamma: cfg.gamma,
            tau: cfg.tau,
            epsilon_start: cfg.epsilon_start,
            epsilon_end: cfg.epsilon_end,
            epsilon_decay_episodes: cfg.epsilon_decay_episodes,
            buffer_capacity: cfg.buffer_capacity,
            frequencies: cfg.omega.frequencies,
            refresh_every: cfg.refresh_every,
            refresh_epochs: cfg.refresh_epochs,
            omega_batch: cfg.omega_batch,
            omega_lr: cfg.omega_lr,
            svg: true,
        }
    }
}

impl RlSection {
    pub fn grid(&self) -> Result<DriftGrid> {
        let grid = match self.drift.as_str() {
            "alternating" => DriftGrid::alternating(
                self.width,
                self.height,
                self.goal_a,
                self.goal_b,
                self.dwell,
            ),
            "border_ring" => DriftGrid::drifting_border(self.width, self.height),
            "stationary" => DriftGrid::stationary(self.width, self.height, self.stationary_goal),
            other => {
                return Err(CliError::validation(format!(
                    "[rl] drift must be 'alternating', 'border_ring', or 'stationary', got '{other}'"
                )))
            }
        };
        grid.validate()?;
        Ok(grid)
    }

    fn non_baseline_weighting(&self) -> Result<Weighting> {
        match self.weighting.as_str() {
            "omega" => Ok(Weighting::Omega),
            "unit" => Ok(Weighting::UnitOmega),
            other => Err(CliError::validation(format!(
                "[rl] weighting must be 'omega' or 'unit', got '{other}'"
            ))),
        }
    }

    /// Full experiment config for one arm.
    pub fn to_core(&self, baseline: bool) -> Result<RlConfig> {
        let weighting = if baseline {
            Weighting::Unweighted
        } else {
            self.non_baseline_weighting()?
        };
        let cfg = RlConfig {
            grid: self.grid()?,
            weighting,
            episodes: self.episodes,
            burn_in: self.burn_in,
            batch_size: self.batch_size,
            updates_per_episode: self.updates_per_episode,
            alpha: self.alpha,
            gamma: self.gamma,
            tau: self.tau,
            epsilon_start: self.epsilon_start,
            epsilon_end: self.epsilon_end,
            epsilon_decay_episodes: self.epsilon_decay_episodes,
            buffer_capacity: self.buffer_capacity,
            omega: OmegaSpec {
                frequencies: self.frequencies,
                ..OmegaSpec::default()
            },
            refresh_every: self.refresh_every,
            refresh_epochs: self.refresh_epochs,
            omega_batch: self.omega_batch,
            omega_lr: self.omega_lr,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        // Building both arms runs every core-side check.
        self.to_core(true)?;
        self.to_core(false)?;
        Ok(())
    }
}

/// Weight-quality report (current-vs-past kernel discrepancy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Kernel bandwidth; 0 selects the per-step median heuristic.
    pub bandwidth: f64,
    /// Emit a discrepancy-vs-step chart next to the CSV.
    pub svg: bool,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            bandwidth: 0.0,
            svg: true,
        }
    }
}

impl ValidateSection {
    pub fn bandwidth_option(&self) -> Option<f64> {
        positive_or_none(self.bandwidth)
    }

    fn validate(&self) -> Result<()> {
        check_nonneg_finite("[validate] bandwidth", self.bandwidth)
    }
}

// -------------------------------------------------------------- whole config

/// The complete experiment configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub schedule: ScheduleSection,
    pub omega: OmegaSection,
    pub model: ModelSection,
    pub beta: BetaSection,
    pub benchmark: BenchmarkSection,
    pub rl: RlSection,
    pub validate: ValidateSection,
}

impl ExperimentConfig {
    /// Parse a TOML file; missing file is an I/O error, bad contents a
    /// validation error. The result has already passed [`Self::validate`].
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io_at(path, e))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every semantic check, run before any command does work.
    pub fn validate(&self) -> Result<()> {
        if self.run.jobs == 0 {
            return Err(CliError::validation("[run] jobs must be positive"));
        }
        if self.run.samples_per_step < 2 {
            return Err(CliError::validation(
                "[run] samples_per_step must be at least 2",
            ));
        }
        if self.run.test_samples == 0 {
            return Err(CliError::validation("[run] test_samples must be positive"));
        }
        if self.run.seeds.is_empty() {
            return Err(CliError::validation("[run] seeds must not be empty"));
        }
        self.schedule.to_core().validate()?;
        self.omega.validate()?;
        self.model.validate()?;
        self.beta.validate()?;
        self.benchmark.validate()?;
        self.rl.validate()?;
        self.validate.validate()?;
        Ok(())
    }

    /// Canonical serialization: section and field order are fixed by the
    /// struct definitions, so two semantically equal configs serialize
    /// byte-identically regardless of their source formatting.
    pub fn canonical_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Hash of the canonical serialization, recorded in output manifests.
    ///
    /// Where artifacts land and how many workers produce them cannot change
    /// their bytes, so `out_dir` and `jobs` are pinned before hashing:
    /// rerunning the same experiment with a different `--jobs` or into a
    /// relocated directory is not a conflict worth refusing.
    pub fn hash_hex(&self) -> String {
        let mut pinned = self.clone();
        pinned.run.out_dir = String::new();
        pinned.run.jobs = 1;
        format!(
            "{:016x}",
            seeding::hash_bytes(pinned.canonical_string().as_bytes())
        )
    }
}

// ------------------------------------------------------------------- helpers

/// Map the "0 means disabled" TOML convention onto `Option`.
fn positive_or_none(v: f64) -> Option<f64> {
    if v > 0.0 {
        Some(v)
    } else {
        None
    }
}

fn check_positive_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("{name} must be positive")))
    }
}

fn check_nonneg_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("{name} must be nonnegative")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trips_losslessly() {
        let mut cfg = ExperimentConfig::default();
        cfg.run.seed = 1234567890123;
        cfg.omega.clip = 0.0;
        cfg.omega.lr = 3.5e-4;
        cfg.schedule = ScheduleSection::LabelShift {
            horizon: 6,
            classes: 10,
            steps_per_pair: 2,
            feature_dim: 12,
            peak_mass: 0.55,
            class_separation: 2.25,
        };
        let text = cfg.canonical_string();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical_string(), text);
        assert_eq!(back.hash_hex(), cfg.hash_hex());
    }

    #[test]
    fn empty_file_equals_defaults() {
        let cfg: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn formatting_does_not_change_hash() {
        let a: ExperimentConfig = toml::from_str("[run]\nseed = 9\n").unwrap();
        let b: ExperimentConfig = toml::from_str("\n\n[run]\n\n  seed    =   9\n").unwrap();
        assert_eq!(a.hash_hex(), b.hash_hex());
        assert_ne!(a.hash_hex(), ExperimentConfig::default().hash_hex());
    }

    #[test]
    fn placement_and_parallelism_do_not_change_hash() {
        let base = ExperimentConfig::default();
        let mut moved = base.clone();
        moved.run.out_dir = "elsewhere/runs".into();
        moved.run.jobs = 8;
        assert_eq!(base.hash_hex(), moved.hash_hex());

        let mut drifted = base.clone();
        drifted.run.samples_per_step += 1;
        assert_ne!(base.hash_hex(), drifted.hash_hex());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[run]\nseeed = 1\n").is_err());
        assert!(toml::from_str::<ExperimentConfig>("[typo_section]\nx = 1\n").is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.run.seeds.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.schedule = ScheduleSection::GaussianWalk {
            horizon: 0,
            mu0: 0.0,
            drift: 2.0,
            flip_period: 10,
        };
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.omega.method = "method3".into();
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.benchmark.protocols = vec!["nonsense".into()];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.rl.drift = "teleporting".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn clip_zero_disables() {
        let mut cfg = ExperimentConfig::default();
        cfg.omega.clip = 0.0;
        let spec = cfg.omega.to_spec(None).unwrap();
        assert_eq!(spec.clip, None);
        cfg.omega.clip = 2.5;
        let spec = cfg.omega.to_spec(None).unwrap();
        assert_eq!(spec.clip, Some(2.5));
    }

    #[test]
    fn schedule_kinds_build_core_types() {
        let cfg = ExperimentConfig::default();
        let core = cfg.schedule.to_core();
        assert_eq!(core.horizon(), 40);
        assert_eq!(core.feature_dim(), 1);
        assert_eq!(core.num_classes(), 2);

        let ls: ExperimentConfig =
            toml::from_str("[schedule]\nkind = \"label_shift\"\n").unwrap();
        let core = ls.schedule.to_core();
        assert_eq!(core.horizon(), 6);
        assert_eq!(core.num_classes(), 10);
        assert_eq!(core.feature_dim(), 10);
    }

    #[test]
    fn rl_section_builds_paired_arms() {
        let cfg = ExperimentConfig::default();
        let weighted = cfg.rl.to_core(false).unwrap();
        let baseline = cfg.rl.to_core(true).unwrap();
        assert_eq!(weighted.weighting, Weighting::Omega);
        assert_eq!(baseline.weighting, Weighting::Unweighted);
        assert_eq!(weighted.grid, baseline.grid);
        assert_eq!(weighted.grid.period(), 20);
    }
}
