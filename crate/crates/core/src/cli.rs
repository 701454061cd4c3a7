//! The `run`, `compare` and `plot` commands, independent of argument parsing.
//!
//! Each returns a [`Result`]; [`crate::Error::exit_code`] maps failures to
//! the process status.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::output::{read_episodes_csv, write_run, COMPARISON_FILE, EPISODES_FILE};
use crate::plot::{write_plots, PlotReport};
use crate::stats::{format_p_value, mann_whitney_u, UTestResult};
use crate::trainer::{run_experiment, EpisodeRecord, RunSummary};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: RunSummary,
    pub records: Vec<EpisodeRecord>,
}

/// Runs one experiment and writes its artifacts to `config.output_dir`.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let (summary, records) = run_experiment(config)?;
    write_run(&dir, config, &summary, &records)?;
    Ok(RunOutcome { dir, summary, records })
}

/// Runs one experiment per seed in parallel, each under
/// `output_dir/seed-<n>`.
pub fn cmd_sweep(config: &RunConfig, seeds: &[u64]) -> Result<Vec<RunOutcome>> {
    config.validate()?;
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = RunConfig {
                seed,
                output_dir: config.output_dir.join(format!("seed-{seed}")),
                ..config.clone()
            };
            cmd_run(&cfg)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentComparison {
    pub agent: usize,
    pub test: UTestResult,
    pub mean_a: f64,
    pub mean_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub agents: Vec<AgentComparison>,
}

/// Episode records from a run directory, or from executing a config file.
fn load_side(path: &Path) -> Result<Vec<EpisodeRecord>> {
    if path.is_dir() {
        return read_episodes_csv(&path.join(EPISODES_FILE));
    }
    if path.is_file() {
        return Ok(cmd_run(&RunConfig::from_kv_file(path)?)?.records);
    }
    Err(Error::config(format!("{}: no such run directory or config file", path.display())))
}

/// Mann-Whitney U on per-episode rewards, agent by agent.
pub fn compare_records(a: &[EpisodeRecord], b: &[EpisodeRecord]) -> Result<Vec<AgentComparison>> {
    let agents = |r: &[EpisodeRecord]| r.first().map_or(0, |e| e.agents.len());
    let (na, nb) = (agents(a), agents(b));
    if na != nb {
        return Err(Error::config(format!("agent counts differ: {na} vs {nb}")));
    }
    (0..na)
        .map(|i| {
            let ra: Vec<f64> = a.iter().map(|r| r.agents[i].total_reward).collect();
            let rb: Vec<f64> = b.iter().map(|r| r.agents[i].total_reward).collect();
            Ok(AgentComparison {
                agent: i,
                test: mann_whitney_u(&ra, &rb)?,
                mean_a: crate::stats::mean(&ra),
                mean_b: crate::stats::mean(&rb),
            })
        })
        .collect()
}

pub fn format_comparison(c: &Comparison) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "A: {}", c.label_a);
    let _ = writeln!(s, "B: {}", c.label_b);
    let _ = writeln!(s, "Mann-Whitney U on per-episode total reward (two-sided)");
    for a in &c.agents {
        let _ = writeln!(
            s,
            "Agent {}: U = {:.1}, p {}, r = {:.4} (mean A {:.4}, mean B {:.4})",
            a.agent,
            a.test.u,
            match format_p_value(a.test.p_value) {
                p if p.starts_with('<') => p,
                p => format!("= {p}"),
            },
            a.test.effect_size,
            a.mean_a,
            a.mean_b
        );
    }
    s
}

/// Compares two runs and writes `comparison.txt` into `out_dir`.
pub fn cmd_compare(a: &Path, b: &Path, out_dir: &Path) -> Result<Comparison> {
    let ra = load_side(a)?;
    let rb = load_side(b)?;
    let c = Comparison {
        label_a: a.display().to_string(),
        label_b: b.display().to_string(),
        agents: compare_records(&ra, &rb)?,
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(COMPARISON_FILE);
    fs::write(&path, format_comparison(&c)).map_err(|e| Error::io(&path, e))?;
    Ok(c)
}

/// Reads `episodes.csv` from `run_dir` and writes the figures next to it.
pub fn cmd_plot(run_dir: &Path) -> Result<PlotReport> {
    if !run_dir.is_dir() {
        return Err(Error::config(format!("{}: not a run directory", run_dir.display())));
    }
    let records = read_episodes_csv(&run_dir.join(EPISODES_FILE))?;
    write_plots(run_dir, &records)
}
