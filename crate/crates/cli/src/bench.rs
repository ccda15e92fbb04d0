//! Next-step accuracy benchmark across training protocols.
//!
//! For every replicate seed and every cutoff step `t`, each protocol trains
//! a fresh classifier on the stream's history through `t` and is scored on
//! fresh samples from step `t + 1`. Within a replicate all protocols see
//! the same stream and the same test sets, so comparisons are paired.

use std::collections::BTreeMap;
use std::thread;
use std::time::Instant;

use driftweight_core::drift::{at_step, history, DriftSchedule, TimedSample};
use driftweight_core::omega::{self, Method};
use driftweight_core::seeding::{self, child_rng, child_seed};
use driftweight_core::trainers::{
    evaluate_next_step, train_everything, train_finetune, train_recent, train_weighted,
    TaskModel, TaskTrainConfig,
};

use crate::config::ExperimentConfig;
use crate::csvio::{BenchRow, BenchSummaryRow};
use crate::error::{CliError, Result};

// ----------------------------------------------------------------- protocols

/// One training-protocol arm of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    /// Pool all history, every sample weighted equally.
    Everything,
    /// Train on the latest step only.
    Recent,
    /// Pretrain on the past, then continue on the latest step.
    Finetune,
    /// Weight history by the time-indexed estimator; `None` uses the
    /// configured loss variant, `Some` pins it (for side-by-side runs).
    OmegaWeighted(Option<Method>),
    /// Weight history by the standard time-free propensity classifier.
    BetaWeighted,
}

impl Protocol {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "everything" => Ok(Protocol::Everything),
            "recent" => Ok(Protocol::Recent),
            "finetune" => Ok(Protocol::Finetune),
            "omega_weighted" => Ok(Protocol::OmegaWeighted(None)),
            "omega_weighted_method1" => Ok(Protocol::OmegaWeighted(Some(Method::Method1))),
            "omega_weighted_method2" => Ok(Protocol::OmegaWeighted(Some(Method::Method2))),
            "beta_weighted" => Ok(Protocol::BetaWeighted),
            other => Err(CliError::validation(format!(
                "unknown protocol '{other}' (expected everything, recent, finetune, \
                 omega_weighted, omega_weighted_method1, omega_weighted_method2, \
                 or beta_weighted)"
            ))),
        }
    }

    /// The name used in CSV rows and seed derivation.
    pub fn label(&self) -> String {
        match self {
            Protocol::Everything => "everything".into(),
            Protocol::Recent => "recent".into(),
            Protocol::Finetune => "finetune".into(),
            Protocol::OmegaWeighted(None) => "omega_weighted".into(),
            Protocol::OmegaWeighted(Some(m)) => format!("omega_weighted_{}", m.name()),
            Protocol::BetaWeighted => "beta_weighted".into(),
        }
    }
}

/// Parse the configured protocol list.
pub fn parse_protocols(names: &[String]) -> Result<Vec<Protocol>> {
    names.iter().map(|s| Protocol::parse(s)).collect()
}

// ----------------------------------------------------------------- execution

/// Everything a worker needs to run one replicate.
struct ReplicateJob<'a> {
    cfg: &'a ExperimentConfig,
    schedule: &'a DriftSchedule,
    protocols: &'a [Protocol],
    /// Pre-generated shared stream ("files" mode); `None` regenerates
    /// per replicate.
    shared_stream: Option<&'a [TimedSample]>,
    seed: u64,
}

/// Cutoff steps evaluated by the benchmark: train through `t`, test at
/// `t + 1`. Starts at 1 so every arm (including the history-contrast ones)
/// has at least two distinct steps to work with.
pub fn cutoff_steps(horizon: usize) -> std::ops::Range<usize> {
    1..horizon.saturating_sub(1)
}

/// Run the benchmark over every replicate seed; rows come back sorted by
/// (protocol, seed, step). `shared_stream` substitutes a fixed stream for
/// per-replicate generation.
pub fn run_benchmark(
    cfg: &ExperimentConfig,
    shared_stream: Option<&[TimedSample]>,
) -> Result<Vec<BenchRow>> {
    let schedule = cfg.schedule.to_core();
    schedule.validate()?;
    if cutoff_steps(schedule.horizon()).is_empty() {
        return Err(CliError::validation(
            "schedule horizon must be at least 3 to evaluate any next step",
        ));
    }
    let protocols = parse_protocols(&cfg.benchmark.protocols)?;

    let jobs = cfg.run.jobs.max(1).min(cfg.run.seeds.len().max(1));
    let chunk = cfg.run.seeds.len().div_ceil(jobs);
    let mut rows: Vec<BenchRow> = if jobs <= 1 {
        let mut all = Vec::new();
        for &seed in &cfg.run.seeds {
            all.extend(run_replicate(&ReplicateJob {
                cfg,
                schedule: &schedule,
                protocols: &protocols,
                shared_stream,
                seed,
            })?);
        }
        all
    } else {
        // Independent replicates fan out across threads; aggregation stays
        // on this thread after the joins.
        let results: Vec<Result<Vec<BenchRow>>> = thread::scope(|scope| {
            let handles: Vec<_> = cfg
                .run
                .seeds
                .chunks(chunk)
                .map(|seeds| {
                    let schedule = &schedule;
                    let protocols = &protocols;
                    scope.spawn(move || {
                        let mut part = Vec::new();
                        for &seed in seeds {
                            part.extend(run_replicate(&ReplicateJob {
                                cfg,
                                schedule,
                                protocols,
                                shared_stream,
                                seed,
                            })?);
                        }
                        Ok(part)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("benchmark worker panicked"))
                .collect()
        });
        let mut all = Vec::new();
        for r in results {
            all.extend(r?);
        }
        all
    };

    rows.sort_by(|a, b| {
        (a.protocol.as_str(), a.seed, a.t).cmp(&(b.protocol.as_str(), b.seed, b.t))
    });
    Ok(rows)
}

/// All (cutoff, protocol) cells for one replicate seed.
fn run_replicate(job: &ReplicateJob<'_>) -> Result<Vec<BenchRow>> {
    let rep_master = child_seed(job.cfg.run.seed, "replicate", &[job.seed]);
    let owned;
    let stream: &[TimedSample] = match job.shared_stream {
        Some(s) => s,
        None => {
            owned = job.schedule.generate_stream(
                job.cfg.run.samples_per_step,
                child_seed(rep_master, "stream", &[]),
            )?;
            &owned
        }
    };
    let num_classes = job.schedule.num_classes();
    let model_cfg = job.cfg.model.to_core();

    let mut rows = Vec::new();
    for t in cutoff_steps(job.schedule.horizon()) {
        let hist = history(stream, t);
        for proto in job.protocols {
            let started = Instant::now();
            let (model, n_train) =
                train_arm(job.cfg, *proto, hist, t, num_classes, &model_cfg, rep_master)?;
            let accuracy = evaluate_next_step(
                &model,
                job.schedule,
                t + 1,
                job.cfg.run.test_samples,
                rep_master,
            )?;
            rows.push(BenchRow {
                protocol: proto.label(),
                seed: job.seed,
                t: t + 1,
                accuracy,
                n_train,
                wallclock_ms: started.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(rows)
}

/// Train one protocol arm on `hist` (history through step `t`).
fn train_arm(
    cfg: &ExperimentConfig,
    proto: Protocol,
    hist: &[TimedSample],
    t: usize,
    num_classes: usize,
    model_cfg: &TaskTrainConfig,
    rep_master: u64,
) -> Result<(TaskModel, usize)> {
    let label = proto.label();
    let mut rng = child_rng(rep_master, &label, &[t as u64]);
    match proto {
        Protocol::Everything => {
            let m = train_everything(hist, num_classes, model_cfg, &mut rng)?;
            Ok((m, hist.len()))
        }
        Protocol::Recent => {
            let n = at_step(hist, t).len();
            let m = train_recent(hist, num_classes, model_cfg, &mut rng)?;
            Ok((m, n))
        }
        Protocol::Finetune => {
            let m = train_finetune(hist, num_classes, model_cfg, &mut rng)?;
            Ok((m, hist.len()))
        }
        Protocol::OmegaWeighted(method) => {
            let spec = cfg.omega.to_spec(method)?;
            let train_cfg = cfg.omega.to_train_config();
            let mut fit_rng = child_rng(rep_master, &format!("{label}-fit"), &[t as u64]);
            // The weight estimator sees the joint record (features + label):
            // a stale sample whose label contradicts the current concept has
            // near-zero current-step density, so its weight collapses even
            // where the covariate alone still looks plausible.
            let joint = augment_with_labels(hist, num_classes)?;
            // Horizon t + 1: the estimator's time encoding spans exactly the
            // observed steps, and the weight target t is in range.
            let (est, _report) = omega::fit(&joint, t + 1, &spec, &train_cfg, &mut fit_rng)?;
            let weights = est.weights_at(&joint, t)?;
            let m = train_weighted(hist, &weights, num_classes, model_cfg, &mut rng)?;
            Ok((m, hist.len()))
        }
        Protocol::BetaWeighted => {
            let beta_cfg = cfg.beta.to_core();
            let mut fit_rng = child_rng(rep_master, &format!("{label}-fit"), &[t as u64]);
            // The standard propensity is a time-free function of the
            // covariates alone: one balanced past-vs-current classifier on x,
            // blind to both the label and the draw step. That blindness is
            // the point of carrying this arm as a baseline.
            let split = hist.partition_point(|s| s.t < t);
            let est = omega::fit_standard_propensity(
                hist,
                &hist[split..],
                &beta_cfg,
                &mut fit_rng,
            )?;
            let weights = est.beta_batch(hist)?;
            let m = train_weighted(hist, &weights, num_classes, model_cfg, &mut rng)?;
            Ok((m, hist.len()))
        }
    }
}

/// Estimator-side view of labeled samples: features with a one-hot label
/// block appended. Weighted protocols require every sample to be labeled.
fn augment_with_labels(samples: &[TimedSample], num_classes: usize) -> Result<Vec<TimedSample>> {
    samples
        .iter()
        .map(|s| {
            let y = s.y.ok_or_else(|| {
                CliError::validation("weighted protocols need labeled samples")
            })?;
            if y >= num_classes {
                return Err(CliError::validation(format!(
                    "label {y} out of range for {num_classes} classes"
                )));
            }
            let mut x = Vec::with_capacity(s.x.len() + num_classes);
            x.extend_from_slice(&s.x);
            x.resize(s.x.len() + num_classes, 0.0);
            x[s.x.len() + y] = 1.0;
            Ok(TimedSample { t: s.t, x, y: s.y })
        })
        .collect()
}

// ------------------------------------------------------------------ summary

/// Aggregate per-(protocol, step) means across replicate seeds.
pub fn summarize(rows: &[BenchRow]) -> Vec<BenchSummaryRow> {
    let mut cells: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        cells
            .entry((r.protocol.clone(), r.t))
            .or_default()
            .push(r.accuracy);
    }
    cells
        .into_iter()
        .map(|((protocol, t), accs)| {
            let n = accs.len();
            let mean = accs.iter().sum::<f64>() / n as f64;
            let stderr = if n < 2 {
                0.0
            } else {
                let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>()
                    / (n as f64 - 1.0);
                (var / n as f64).sqrt()
            };
            BenchSummaryRow {
                protocol,
                t,
                mean_accuracy: mean,
                stderr,
                n_seeds: n,
            }
        })
        .collect()
}

/// Human-readable plan for `--dry-run`.
pub fn plan_description(cfg: &ExperimentConfig) -> Result<String> {
    let schedule = cfg.schedule.to_core();
    let protocols = parse_protocols(&cfg.benchmark.protocols)?;
    let steps = cutoff_steps(schedule.horizon());
    let n_steps = steps.end.saturating_sub(steps.start);
    let mut out = String::new();
    out.push_str(&format!(
        "benchmark plan: {} replicate seed(s) x {} cutoff step(s) x {} protocol(s) = {} cells\n",
        cfg.run.seeds.len(),
        n_steps,
        protocols.len(),
        cfg.run.seeds.len() * n_steps * protocols.len(),
    ));
    out.push_str(&format!(
        "  cutoffs t = {}..{} (evaluate at t + 1), {} samples/step, {} test samples\n",
        steps.start,
        steps.end - 1,
        cfg.run.samples_per_step,
        cfg.run.test_samples,
    ));
    out.push_str(&format!(
        "  protocols: {}\n",
        protocols
            .iter()
            .map(|p| p.label())
            .collect::<Vec<_>>()
            .join(", ")
    ));
    Ok(out)
}

/// Deterministic replicate-level work seed, exposed for tests.
pub fn replicate_master(run_seed: u64, replicate: u64) -> u64 {
    seeding::child_seed(run_seed, "replicate", &[replicate])
}
