//! The six subcommands: stream generation, estimator training, the protocol
//! benchmark, the RL experiment, the weight-quality report, and chart
//! re-rendering.
//!
//! Conventions shared by all commands:
//! - The config is fully validated before any filesystem write (fail-fast).
//! - Every data-producing command records its config hash in the output
//!   directory's manifest and refuses a mismatched rerun without `--force`.
//! - All randomness descends from `[run] seed`; reruns are byte-identical
//!   except for wallclock columns.
//! - `--dry-run` prints the work plan and writes nothing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::thread;

use driftweight_core::drift::TimedSample;
use driftweight_core::omega::{self, OmegaEstimator};
use driftweight_core::rl::{run_rl_seed, RlCurvePoint};
use driftweight_core::seeding::{child_rng, child_seed};
use driftweight_core::validate::weight_quality_trajectory;

use crate::bench;
use crate::config::ExperimentConfig;
use crate::csvio::{
    self, read_stream_dir, write_stream_files, write_text, Manifest, RlRow, RlSummaryRow,
};
use crate::error::{CliError, Result};
use crate::svg::{self, Series};

pub const ESTIMATOR_FILE: &str = "omega_estimator.txt";
pub const ESTIMATOR_REPORT_FILE: &str = "omega_report.csv";
pub const BENCH_SUMMARY_FILE: &str = "bench_summary.csv";
pub const BENCH_SVG_FILE: &str = "bench.svg";
pub const RL_SUMMARY_FILE: &str = "rl_summary.csv";
pub const RL_SVG_FILE: &str = "rl.svg";
pub const MMD_REPORT_FILE: &str = "mmd_report.csv";
pub const MMD_SVG_FILE: &str = "mmd.svg";

pub fn bench_seed_file(seed: u64) -> String {
    format!("bench_seed_{seed:04}.csv")
}

pub fn rl_curve_file(weighted: bool, seed: u64) -> String {
    if weighted {
        format!("rl_weighted_seed_{seed:04}.csv")
    } else {
        format!("rl_unweighted_seed_{seed:04}.csv")
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from(&cfg.run.out_dir)
}

/// Seed of the shared (non-replicate) stream used by `gen`, `train-omega`,
/// and `validate`. Benchmark replicates derive their own streams instead.
fn shared_stream_seed(cfg: &ExperimentConfig) -> u64 {
    child_seed(cfg.run.seed, "stream", &[])
}

fn generate_shared_stream(cfg: &ExperimentConfig) -> Result<Vec<TimedSample>> {
    let schedule = cfg.schedule.to_core();
    Ok(schedule.generate_stream(cfg.run.samples_per_step, shared_stream_seed(cfg))?)
}

/// The shared stream: previously generated files when present, otherwise
/// regenerated inline (bit-identical to what `gen` would write).
fn load_or_generate_stream(cfg: &ExperimentConfig) -> Result<Vec<TimedSample>> {
    let dir = out_dir(cfg);
    if dir.join(csvio::stream_file_name(0)).exists() {
        read_stream_dir(&dir)
    } else {
        generate_shared_stream(cfg)
    }
}

// ------------------------------------------------------------------- cmd gen

/// Write the per-step stream files.
pub fn cmd_gen(cfg: &ExperimentConfig, dry_run: bool, force: bool) -> Result<()> {
    let schedule = cfg.schedule.to_core();
    if dry_run {
        println!(
            "gen plan: {} stream files x {} rows into {}",
            schedule.horizon(),
            cfg.run.samples_per_step,
            cfg.run.out_dir
        );
        return Ok(());
    }
    let dir = out_dir(cfg);
    Manifest::check_and_record(&dir, "gen", &cfg.hash_hex(), cfg.run.seed, force)?;
    let stream = generate_shared_stream(cfg)?;
    let paths = write_stream_files(&dir, &stream)?;
    println!(
        "gen: wrote {} stream files ({} samples each) to {}",
        paths.len(),
        cfg.run.samples_per_step,
        dir.display()
    );
    Ok(())
}

// ----------------------------------------------------------- cmd train-omega

/// Fit the importance-weight estimator on the shared stream and snapshot it.
pub fn cmd_train_omega(cfg: &ExperimentConfig, dry_run: bool, force: bool) -> Result<()> {
    let schedule = cfg.schedule.to_core();
    if dry_run {
        println!(
            "train-omega plan: fit {} estimator for {} epochs on a {}-step stream, \
             snapshot to {}/{ESTIMATOR_FILE}",
            cfg.omega.method,
            cfg.omega.epochs,
            schedule.horizon(),
            cfg.run.out_dir
        );
        return Ok(());
    }
    let dir = out_dir(cfg);
    Manifest::check_and_record(&dir, "train-omega", &cfg.hash_hex(), cfg.run.seed, force)?;
    let stream = load_or_generate_stream(cfg)?;
    let spec = cfg.omega.to_spec(None)?;
    let train_cfg = cfg.omega.to_train_config();
    let mut rng = child_rng(cfg.run.seed, "train-omega", &[]);
    let (est, report) = omega::fit(&stream, schedule.horizon(), &spec, &train_cfg, &mut rng)?;

    write_text(&dir.join(ESTIMATOR_FILE), &est.snapshot_to_string()?)?;
    let mut csv =
        String::from("initial_loss,final_loss,holdout_accuracy,examples_per_epoch,epochs\n");
    let _ = writeln!(
        csv,
        "{:?},{:?},{:?},{},{}",
        report.initial_loss,
        report.final_loss,
        report.holdout_accuracy,
        report.examples_per_epoch,
        report.epochs
    );
    write_text(&dir.join(ESTIMATOR_REPORT_FILE), &csv)?;
    println!(
        "train-omega: held-out loss {:.4} -> {:.4}, contrast accuracy {:.3}; \
         snapshot at {}",
        report.initial_loss,
        report.final_loss,
        report.holdout_accuracy,
        dir.join(ESTIMATOR_FILE).display()
    );
    Ok(())
}

// ------------------------------------------------------------- cmd benchmark

/// Run the protocol comparison and write per-seed rows plus a summary.
pub fn cmd_benchmark(cfg: &ExperimentConfig, dry_run: bool, force: bool) -> Result<()> {
    if dry_run {
        print!("{}", bench::plan_description(cfg)?);
        return Ok(());
    }
    let dir = out_dir(cfg);
    Manifest::check_and_record(&dir, "benchmark", &cfg.hash_hex(), cfg.run.seed, force)?;

    let shared = if cfg.benchmark.stream_source == "files" {
        Some(read_stream_dir(&dir)?)
    } else {
        None
    };
    let rows = bench::run_benchmark(cfg, shared.as_deref())?;

    for &seed in &cfg.run.seeds {
        let seed_rows: Vec<_> = rows.iter().filter(|r| r.seed == seed).cloned().collect();
        write_text(
            &dir.join(bench_seed_file(seed)),
            &csvio::bench_rows_csv(&seed_rows),
        )?;
    }
    let summary = bench::summarize(&rows);
    write_text(&dir.join(BENCH_SUMMARY_FILE), &csvio::bench_summary_csv(&summary))?;
    if cfg.benchmark.svg {
        write_bench_svg(&dir, &summary)?;
    }
    println!(
        "benchmark: {} rows over {} seeds; summary at {}",
        rows.len(),
        cfg.run.seeds.len(),
        dir.join(BENCH_SUMMARY_FILE).display()
    );
    Ok(())
}

fn write_bench_svg(dir: &Path, summary: &[csvio::BenchSummaryRow]) -> Result<()> {
    let mut by_protocol: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for row in summary {
        by_protocol
            .entry(&row.protocol)
            .or_default()
            .push((row.t as f64, row.mean_accuracy));
    }
    let series: Vec<Series> = by_protocol
        .into_iter()
        .map(|(name, points)| Series::new(name, points))
        .collect();
    svg::write_line_chart(
        &dir.join(BENCH_SVG_FILE),
        "Next-step test accuracy by training protocol",
        "evaluation step",
        "mean accuracy",
        &series,
    )
}

// -------------------------------------------------------------------- cmd rl

/// Paired weighted/baseline gridworld runs over the replicate seeds.
pub fn cmd_rl(
    cfg: &ExperimentConfig,
    dry_run: bool,
    force: bool,
    baseline_only: bool,
) -> Result<()> {
    let arms = if baseline_only { 1 } else { 2 };
    if dry_run {
        println!(
            "rl plan: {} seed(s) x {} arm(s) x {} episodes on a {}x{} grid \
             (goal schedule: {}, period {})",
            cfg.run.seeds.len(),
            arms,
            cfg.rl.episodes,
            cfg.rl.width,
            cfg.rl.height,
            cfg.rl.drift,
            cfg.rl.grid()?.period(),
        );
        return Ok(());
    }
    let dir = out_dir(cfg);
    Manifest::check_and_record(&dir, "rl", &cfg.hash_hex(), cfg.run.seed, force)?;

    let baseline_cfg = cfg.rl.to_core(true)?;
    let weighted_cfg = cfg.rl.to_core(false)?;

    // One work item per replicate: run both arms on the same derived seed so
    // the comparison is paired.
    type SeedResult = (u64, Vec<RlCurvePoint>, Option<Vec<RlCurvePoint>>);
    let run_one = |seed: u64| -> Result<SeedResult> {
        let rl_seed = child_seed(cfg.run.seed, "rl", &[seed]);
        let baseline = run_rl_seed(&baseline_cfg, rl_seed)?;
        let weighted = if baseline_only {
            None
        } else {
            Some(run_rl_seed(&weighted_cfg, rl_seed)?)
        };
        Ok((seed, baseline, weighted))
    };

    let jobs = cfg.run.jobs.max(1).min(cfg.run.seeds.len());
    let chunk = cfg.run.seeds.len().div_ceil(jobs);
    let results: Vec<SeedResult> = if jobs <= 1 {
        let mut all = Vec::new();
        for &s in &cfg.run.seeds {
            all.push(run_one(s)?);
        }
        all
    } else {
        let nested: Vec<Result<Vec<SeedResult>>> = thread::scope(|scope| {
            let handles: Vec<_> = cfg
                .run
                .seeds
                .chunks(chunk)
                .map(|seeds| {
                    let run_one = &run_one;
                    scope.spawn(move || seeds.iter().map(|&s| run_one(s)).collect())
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("rl worker panicked"))
                .collect()
        });
        let mut all = Vec::new();
        for part in nested {
            all.extend(part?);
        }
        all
    };

    let mut summary_rows = Vec::new();
    for (seed, baseline, weighted) in &results {
        write_text(
            &dir.join(rl_curve_file(false, *seed)),
            &csvio::rl_rows_csv(&to_rl_rows(*seed, baseline)),
        )?;
        if let Some(w) = weighted {
            write_text(
                &dir.join(rl_curve_file(true, *seed)),
                &csvio::rl_rows_csv(&to_rl_rows(*seed, w)),
            )?;
            let wq = final_quarter_mean(w);
            let bq = final_quarter_mean(baseline);
            summary_rows.push(RlSummaryRow {
                seed: *seed,
                weighted_final_quarter: wq,
                unweighted_final_quarter: bq,
                diff: wq - bq,
            });
        }
    }

    if !baseline_only {
        write_text(&dir.join(RL_SUMMARY_FILE), &csvio::rl_summary_csv(&summary_rows))?;
        let wins = summary_rows.iter().filter(|r| r.diff > 0.0).count();
        println!(
            "rl: {} paired seeds, weighted arm ahead in {}/{} (final-quarter mean return)",
            summary_rows.len(),
            wins,
            summary_rows.len()
        );
    } else {
        println!("rl: {} baseline seeds done", results.len());
    }
    if cfg.rl.svg {
        write_rl_svg(&dir, &results, baseline_only)?;
    }
    Ok(())
}

fn to_rl_rows(seed: u64, points: &[RlCurvePoint]) -> Vec<RlRow> {
    points
        .iter()
        .map(|p| RlRow {
            seed,
            episode: p.episode,
            eval_return: p.eval_return,
            buffer_size: p.buffer_size,
            mean_omega: p.mean_omega,
        })
        .collect()
}

/// Mean evaluation return over the last quarter of a curve.
pub fn final_quarter_mean(points: &[RlCurvePoint]) -> f64 {
    let k = (points.len() / 4).max(1);
    let tail = &points[points.len() - k..];
    tail.iter().map(|p| p.eval_return).sum::<f64>() / k as f64
}

fn write_rl_svg(
    dir: &Path,
    results: &[(u64, Vec<RlCurvePoint>, Option<Vec<RlCurvePoint>>)],
    baseline_only: bool,
) -> Result<()> {
    let mean_curve = |pick: &dyn Fn(&(u64, Vec<RlCurvePoint>, Option<Vec<RlCurvePoint>>)) -> Option<&Vec<RlCurvePoint>>|
     -> Vec<(f64, f64)> {
        let curves: Vec<&Vec<RlCurvePoint>> = results.iter().filter_map(pick).collect();
        if curves.is_empty() {
            return Vec::new();
        }
        let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
        (0..len)
            .map(|i| {
                let mean = curves.iter().map(|c| c[i].eval_return).sum::<f64>()
                    / curves.len() as f64;
                (curves[0][i].episode as f64, mean)
            })
            .collect()
    };
    let mut series = vec![Series::new(
        "unweighted",
        mean_curve(&|r| Some(&r.1)),
    )];
    if !baseline_only {
        series.insert(
            0,
            Series::new("weighted", mean_curve(&|r| r.2.as_ref())),
        );
    }
    svg::write_line_chart(
        &dir.join(RL_SVG_FILE),
        "Greedy evaluation return (mean over seeds)",
        "episode",
        "return",
        &series,
    )
}

// -------------------------------------------------------------- cmd validate

/// Current-vs-past discrepancy trajectory under the trained estimator.
pub fn cmd_validate(cfg: &ExperimentConfig, dry_run: bool, force: bool) -> Result<()> {
    let schedule = cfg.schedule.to_core();
    if dry_run {
        println!(
            "validate plan: {}-step stream -> {} report rows using {}/{ESTIMATOR_FILE}",
            schedule.horizon(),
            schedule.horizon() - 1,
            cfg.run.out_dir
        );
        return Ok(());
    }
    let dir = out_dir(cfg);
    let est_path = dir.join(ESTIMATOR_FILE);
    if !est_path.exists() {
        return Err(CliError::io(format!(
            "{}: estimator snapshot not found (run `train-omega` first)",
            est_path.display()
        )));
    }
    Manifest::check_and_record(&dir, "validate", &cfg.hash_hex(), cfg.run.seed, force)?;
    let est = OmegaEstimator::snapshot_from_str(&csvio::read_text(&est_path)?)?;
    let stream = load_or_generate_stream(cfg)?;
    let rows = weight_quality_trajectory(&stream, &est, cfg.validate.bandwidth_option())?;
    write_text(&dir.join(MMD_REPORT_FILE), &csvio::mmd_rows_csv(&rows))?;
    if cfg.validate.svg {
        write_mmd_svg(&dir, &rows)?;
    }
    println!(
        "validate: {} rows at {}",
        rows.len(),
        dir.join(MMD_REPORT_FILE).display()
    );
    Ok(())
}

fn write_mmd_svg(dir: &Path, rows: &[driftweight_core::validate::MmdRow]) -> Result<()> {
    let unweighted: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.t as f64, r.unweighted_nonneg()))
        .collect();
    let weighted: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.t as f64, r.weighted_nonneg()))
        .collect();
    svg::write_line_chart(
        &dir.join(MMD_SVG_FILE),
        "Squared kernel discrepancy: current step vs pooled past",
        "step",
        "squared MMD (zero-truncated)",
        &[
            Series::new("past, unweighted", unweighted),
            Series::new("past, importance-weighted", weighted),
        ],
    )
}

// ------------------------------------------------------------------ cmd plot

/// Re-render every chart whose source CSV exists in the output directory.
pub fn cmd_plot(cfg: &ExperimentConfig, dry_run: bool) -> Result<()> {
    let dir = out_dir(cfg);
    let bench_src = dir.join(BENCH_SUMMARY_FILE);
    let mmd_src = dir.join(MMD_REPORT_FILE);
    let rl_present = cfg
        .run
        .seeds
        .iter()
        .any(|&s| dir.join(rl_curve_file(false, s)).exists());

    let mut plotted = Vec::new();
    if bench_src.exists() {
        if dry_run {
            plotted.push(BENCH_SVG_FILE);
        } else {
            let summary = csvio::read_bench_summary(&bench_src)?;
            write_bench_svg(&dir, &summary)?;
            plotted.push(BENCH_SVG_FILE);
        }
    }
    if mmd_src.exists() {
        if dry_run {
            plotted.push(MMD_SVG_FILE);
        } else {
            let rows = csvio::read_mmd_rows(&mmd_src)?;
            write_mmd_svg(&dir, &rows)?;
            plotted.push(MMD_SVG_FILE);
        }
    }
    if rl_present {
        if dry_run {
            plotted.push(RL_SVG_FILE);
        } else {
            let mut results = Vec::new();
            let mut any_weighted = false;
            for &s in &cfg.run.seeds {
                let base_path = dir.join(rl_curve_file(false, s));
                if !base_path.exists() {
                    continue;
                }
                let baseline = from_rl_rows(&csvio::read_rl_rows(&base_path)?);
                let weighted_path = dir.join(rl_curve_file(true, s));
                let weighted = if weighted_path.exists() {
                    any_weighted = true;
                    Some(from_rl_rows(&csvio::read_rl_rows(&weighted_path)?))
                } else {
                    None
                };
                results.push((s, baseline, weighted));
            }
            write_rl_svg(&dir, &results, !any_weighted)?;
            plotted.push(RL_SVG_FILE);
        }
    }
    if plotted.is_empty() {
        return Err(CliError::io(format!(
            "{}: no report CSVs to plot (run benchmark, rl, or validate first)",
            dir.display()
        )));
    }
    if dry_run {
        println!("plot plan: would render {}", plotted.join(", "));
    } else {
        println!("plot: rendered {}", plotted.join(", "));
    }
    Ok(())
}

fn from_rl_rows(rows: &[RlRow]) -> Vec<RlCurvePoint> {
    rows.iter()
        .map(|r| RlCurvePoint {
            episode: r.episode,
            eval_return: r.eval_return,
            buffer_size: r.buffer_size,
            mean_omega: r.mean_omega,
        })
        .collect()
}
