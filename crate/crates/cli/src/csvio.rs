//! CSV readers/writers for streams, benchmark runs, RL curves, and weight
//! quality reports, plus the per-directory run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting (`{:?}`),
//! so a written file parses back to bit-identical values and reruns under
//! the same config produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use driftweight_core::drift::TimedSample;
use driftweight_core::validate::MmdRow;

use crate::error::{CliError, Result};

// ------------------------------------------------------------- file plumbing

/// Create `dir` (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io_at(dir, e))
}

/// Write `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    fs::write(path, text).map_err(|e| CliError::io_at(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io_at(path, e))
}

// ------------------------------------------------------------- stream files

/// File name for one step of a generated stream.
pub fn stream_file_name(t: usize) -> String {
    format!("stream_t{t:04}.csv")
}

/// Render one step's samples: header `t,y,x_0..x_{d-1}`, one row per sample.
/// Unlabeled samples leave the `y` column empty.
pub fn stream_step_csv(samples: &[TimedSample]) -> Result<String> {
    let d = samples
        .first()
        .ok_or_else(|| CliError::validation("stream step has no samples"))?
        .x
        .len();
    let mut out = String::from("t,y");
    for j in 0..d {
        let _ = write!(out, ",x_{j}");
    }
    out.push('\n');
    for s in samples {
        let _ = write!(out, "{},", s.t);
        if let Some(y) = s.y {
            let _ = write!(out, "{y}");
        }
        for v in &s.x {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Write one file per step into `dir`; returns the paths in step order.
pub fn write_stream_files(dir: &Path, stream: &[TimedSample]) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut paths = Vec::new();
    let mut i = 0;
    while i < stream.len() {
        let t = stream[i].t;
        let mut j = i;
        while j < stream.len() && stream[j].t == t {
            j += 1;
        }
        let path = dir.join(stream_file_name(t));
        write_text(&path, &stream_step_csv(&stream[i..j])?)?;
        paths.push(path);
        i = j;
    }
    Ok(paths)
}

/// Parse one stream CSV back into samples.
pub fn read_stream_file(path: &Path) -> Result<Vec<TimedSample>> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::io(format!("{}: empty stream file", path.display())))?;
    if !header.starts_with("t,y") {
        return Err(CliError::io(format!(
            "{}: unexpected stream header '{header}'",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let bad = |what: &str| {
            CliError::io(format!(
                "{} line {}: {what}",
                path.display(),
                lineno + 2
            ))
        };
        let t = fields
            .next()
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| bad("bad t"))?;
        let y_field = fields.next().ok_or_else(|| bad("missing y"))?;
        let y = if y_field.is_empty() {
            None
        } else {
            Some(y_field.parse::<usize>().map_err(|_| bad("bad y"))?)
        };
        let mut x = Vec::new();
        for f in fields {
            x.push(f.parse::<f64>().map_err(|_| bad("bad feature"))?);
        }
        if x.is_empty() {
            return Err(bad("no features"));
        }
        out.push(TimedSample { t, x, y });
    }
    Ok(out)
}

/// Read every `stream_t*.csv` under `dir`, concatenated in step order.
pub fn read_stream_dir(dir: &Path) -> Result<Vec<TimedSample>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io_at(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("stream_t") && n.ends_with(".csv"))
                .unwrap_or(false)
        })
        .collect();
    if paths.is_empty() {
        return Err(CliError::io(format!(
            "{}: no stream_t*.csv files (run `gen` first)",
            dir.display()
        )));
    }
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_stream_file(&p)?);
    }
    Ok(out)
}

// ---------------------------------------------------------- benchmark tables

/// One (protocol, seed, step) accuracy measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub protocol: String,
    pub seed: u64,
    /// Evaluation step: the model trained on history through `t - 1`.
    pub t: usize,
    pub accuracy: f64,
    pub n_train: usize,
    pub wallclock_ms: f64,
}

pub fn bench_rows_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("protocol,seed,t,accuracy,n_train,wallclock_ms\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:?},{},{:?}",
            r.protocol, r.seed, r.t, r.accuracy, r.n_train, r.wallclock_ms
        );
    }
    out
}

pub fn read_bench_rows(path: &Path) -> Result<Vec<BenchRow>> {
    parse_table(path, "protocol,seed,t,accuracy,n_train,wallclock_ms", |f| {
        Ok(BenchRow {
            protocol: f[0].to_string(),
            seed: parse_field(f[1])?,
            t: parse_field(f[2])?,
            accuracy: parse_field(f[3])?,
            n_train: parse_field(f[4])?,
            wallclock_ms: parse_field(f[5])?,
        })
    })
}

/// Per-(protocol, step) aggregate across replicate seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummaryRow {
    pub protocol: String,
    pub t: usize,
    pub mean_accuracy: f64,
    /// Standard error of the mean; 0 with a single seed.
    pub stderr: f64,
    pub n_seeds: usize,
}

pub fn bench_summary_csv(rows: &[BenchSummaryRow]) -> String {
    let mut out = String::from("protocol,t,mean_accuracy,stderr,n_seeds\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:?},{:?},{}",
            r.protocol, r.t, r.mean_accuracy, r.stderr, r.n_seeds
        );
    }
    out
}

pub fn read_bench_summary(path: &Path) -> Result<Vec<BenchSummaryRow>> {
    parse_table(path, "protocol,t,mean_accuracy,stderr,n_seeds", |f| {
        Ok(BenchSummaryRow {
            protocol: f[0].to_string(),
            t: parse_field(f[1])?,
            mean_accuracy: parse_field(f[2])?,
            stderr: parse_field(f[3])?,
            n_seeds: parse_field(f[4])?,
        })
    })
}

// ----------------------------------------------------------------- rl tables

/// One episode of one RL learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RlRow {
    pub seed: u64,
    pub episode: usize,
    pub eval_return: f64,
    pub buffer_size: usize,
    pub mean_omega: f64,
}

pub fn rl_rows_csv(rows: &[RlRow]) -> String {
    let mut out = String::from("seed,episode,eval_return,buffer_size,mean_omega\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:?},{},{:?}",
            r.seed, r.episode, r.eval_return, r.buffer_size, r.mean_omega
        );
    }
    out
}

pub fn read_rl_rows(path: &Path) -> Result<Vec<RlRow>> {
    parse_table(path, "seed,episode,eval_return,buffer_size,mean_omega", |f| {
        Ok(RlRow {
            seed: parse_field(f[0])?,
            episode: parse_field(f[1])?,
            eval_return: parse_field(f[2])?,
            buffer_size: parse_field(f[3])?,
            mean_omega: parse_field(f[4])?,
        })
    })
}

/// Paired weighted-vs-baseline outcome for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RlSummaryRow {
    pub seed: u64,
    /// Mean evaluation return over the final quarter of episodes.
    pub weighted_final_quarter: f64,
    pub unweighted_final_quarter: f64,
    pub diff: f64,
}

pub fn rl_summary_csv(rows: &[RlSummaryRow]) -> String {
    let mut out =
        String::from("seed,weighted_final_quarter,unweighted_final_quarter,diff\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?}",
            r.seed, r.weighted_final_quarter, r.unweighted_final_quarter, r.diff
        );
    }
    out
}

pub fn read_rl_summary(path: &Path) -> Result<Vec<RlSummaryRow>> {
    parse_table(
        path,
        "seed,weighted_final_quarter,unweighted_final_quarter,diff",
        |f| {
            Ok(RlSummaryRow {
                seed: parse_field(f[0])?,
                weighted_final_quarter: parse_field(f[1])?,
                unweighted_final_quarter: parse_field(f[2])?,
                diff: parse_field(f[3])?,
            })
        },
    )
}

// ---------------------------------------------------------------- mmd tables

pub fn mmd_rows_csv(rows: &[MmdRow]) -> String {
    let mut out =
        String::from("t,mmd_unweighted,mmd_weighted,bandwidth,n_current,n_past\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{},{}",
            r.t, r.unweighted, r.weighted, r.bandwidth, r.n_current, r.n_past
        );
    }
    out
}

pub fn read_mmd_rows(path: &Path) -> Result<Vec<MmdRow>> {
    parse_table(
        path,
        "t,mmd_unweighted,mmd_weighted,bandwidth,n_current,n_past",
        |f| {
            Ok(MmdRow {
                t: parse_field(f[0])?,
                unweighted: parse_field(f[1])?,
                weighted: parse_field(f[2])?,
                bandwidth: parse_field(f[3])?,
                n_current: parse_field(f[4])?,
                n_past: parse_field(f[5])?,
            })
        },
    )
}

// -------------------------------------------------------------- run manifest

/// What one subcommand recorded about its last run in a directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub config_hash: String,
    pub seed: u64,
}

/// Per-output-directory record of which configs produced its contents.
///
/// Keyed by subcommand name. A rerun whose config hash differs from the
/// recorded one refuses to overwrite unless forced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Manifest {
    pub entries: BTreeMap<String, ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.toml";

impl Manifest {
    /// Read the manifest in `dir`; absent file means an empty manifest.
    pub fn load(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = read_text(&path)?;
        toml::from_str(&text)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text =
            toml::to_string_pretty(self).expect("manifest serialization cannot fail");
        write_text(&dir.join(MANIFEST_FILE), &text)
    }

    /// Gate an output directory: refuse when `command` previously ran here
    /// with a different config hash or seed, unless `force`. On success the
    /// updated manifest is written back.
    pub fn check_and_record(
        dir: &Path,
        command: &str,
        config_hash: &str,
        seed: u64,
        force: bool,
    ) -> Result<()> {
        ensure_dir(dir)?;
        let mut manifest = Manifest::load(dir)?;
        if let Some(prev) = manifest.entries.get(command) {
            let same = prev.config_hash == config_hash && prev.seed == seed;
            if !same && !force {
                return Err(CliError::validation(format!(
                    "{} was produced by `{command}` with config hash {} (seed {}); \
                     current config hashes to {} (seed {}). Pass --force to overwrite.",
                    dir.display(),
                    prev.config_hash,
                    prev.seed,
                    config_hash,
                    seed
                )));
            }
        }
        manifest.entries.insert(
            command.to_string(),
            ManifestEntry {
                config_hash: config_hash.to_string(),
                seed,
            },
        );
        manifest.save(dir)
    }
}

// ------------------------------------------------------------------- parsing

fn parse_field<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| CliError::io(format!("bad csv field '{s}'")))
}

/// Split a CSV with a known header into typed rows.
fn parse_table<T>(
    path: &Path,
    header: &str,
    mut row: impl FnMut(&[&str]) -> Result<T>,
) -> Result<Vec<T>> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let got = lines
        .next()
        .ok_or_else(|| CliError::io(format!("{}: empty file", path.display())))?;
    if got != header {
        return Err(CliError::io(format!(
            "{}: expected header '{header}', got '{got}'",
            path.display()
        )));
    }
    let ncols = header.split(',').count();
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(CliError::io(format!(
                "{} line {}: expected {ncols} fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        out.push(row(&fields).map_err(|e| {
            CliError::io(format!("{} line {}: {e}", path.display(), lineno + 2))
        })?);
    }
    Ok(out)
}
