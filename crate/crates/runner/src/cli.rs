//! Command-line front end.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::analyze::analyze;
use crate::cache::EdCache;
use crate::config::{load, AnalyzeConfig, SweepConfig, VarianceConfig, VqeConfig};
use crate::error::{RunError, RunResult};
use crate::output::{fmt_f64, fmt_opt, write_json, Table};
use crate::scan::variance_scan;
use crate::sweep::field_sweep;
use crate::vqe::{summarize, vqe_train, TrialResult};

pub const FULL_SCALE_TRIALS: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "bpscope", version, about = "Gradient-variance analysis and VQE experiments for block circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "bpscope-out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Use 100 trials per VQE cell.
    #[arg(long = "paper-scale", global = true)]
    pub full_scale: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact variance, bounds and path sets for every parameter.
    Analyze { config: PathBuf },
    /// Variance against system size or block distance.
    Variance { config: PathBuf },
    /// Repeated VQE training.
    Vqe { config: PathBuf },
    /// VQE over families and field strengths.
    Sweep { config: PathBuf },
}

/// Files written by one invocation, relative to the output directory.
pub type Written = Vec<PathBuf>;

fn sidecar(out: &Path, name: &str, config: serde_json::Value, extra: serde_json::Value, start: Instant) -> RunResult<PathBuf> {
    let path = out.join(format!("{name}.json"));
    write_json(
        &path,
        &json!({
            "command": name,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "run": extra,
            "wall_time_seconds": start.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(path)
}

fn save(out: &Path, name: &str, t: &Table) -> RunResult<PathBuf> {
    let path = out.join(format!("{name}.csv"));
    t.write(&path)?;
    Ok(path)
}

fn trial_tables(cells: &[(String, String, &[TrialResult])]) -> (Table, Table) {
    let mut trials = Table::new(&["family", "h", "trial", "seed", "iterations_run", "final_energy", "s_topo"]);
    let mut traj = Table::new(&["family", "h", "trial", "iteration", "energy"]);
    for (family, h, results) in cells {
        for r in results.iter() {
            trials.push(vec![
                family.clone(),
                h.clone(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.iterations_run().to_string(),
                fmt_f64(r.final_energy),
                fmt_opt(r.final_s_topo),
            ]);
            for (i, e) in r.trajectory.iter().enumerate() {
                traj.push(vec![family.clone(), h.clone(), r.trial.to_string(), i.to_string(), fmt_f64(*e)]);
            }
        }
    }
    (trials, traj)
}

fn wall_times(results: &[TrialResult]) -> serde_json::Value {
    json!(results.iter().map(|r| json!({"trial": r.trial, "seed": r.seed, "wall_time_seconds": r.wall_time})).collect::<Vec<_>>())
}

fn execute(cli: &Cli) -> RunResult<Written> {
    let out = &cli.common.out;
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let cache = EdCache::new(Some(out.join("ed_cache")));
    match &cli.command {
        Command::Analyze { config } => {
            let cfg: AnalyzeConfig = load(config)?;
            let t = analyze(&cfg)?;
            Ok(vec![save(out, "analyze", &t)?, sidecar(out, "analyze", serde_json::to_value(&cfg)?, json!({}), start)?])
        }
        Command::Variance { config } => {
            let mut cfg: VarianceConfig = load(config)?;
            if let Some(s) = cli.common.seed {
                cfg.seed = s;
            }
            let t = variance_scan(&cfg)?;
            let seeds = t.column("seed").unwrap_or_default().into_iter().filter(|s| !s.is_empty()).map(String::from).collect::<Vec<_>>();
            Ok(vec![
                save(out, "variance", &t)?,
                sidecar(out, "variance", serde_json::to_value(&cfg)?, json!({"row_seeds": seeds}), start)?,
            ])
        }
        Command::Vqe { config } => {
            let mut cfg: VqeConfig = load(config)?;
            if let Some(s) = cli.common.seed {
                cfg.seed = s;
            }
            if cli.common.full_scale {
                cfg.trials = FULL_SCALE_TRIALS;
            }
            cfg.validate()?;
            let results = vqe_train(&cfg)?;
            let s = summarize(&results, cfg.best_count());
            let ham = cfg.model.build()?;
            let ed = cache.ground_energy(&ham)?;
            let mut summary = Table::new(&["family", "qubits", "trials", "best_count", "energy_mean", "energy_std", "s_topo_mean", "s_topo_std", "ed_energy"]);
            summary.push(vec![
                cfg.ansatz.family_name().into(),
                ham.num_qubits().to_string(),
                cfg.trials.to_string(),
                s.count.to_string(),
                fmt_f64(s.energy_mean),
                fmt_f64(s.energy_std),
                fmt_opt(s.s_topo_mean),
                fmt_opt(s.s_topo_std),
                fmt_f64(ed),
            ]);
            let family = cfg.ansatz.family_name().to_string();
            let (trials, traj) = trial_tables(&[(family, String::new(), &results)]);
            let mut resolved = serde_json::to_value(&cfg)?;
            resolved["regions"] = serde_json::to_value(cfg.resolved_regions())?;
            Ok(vec![
                save(out, "vqe_summary", &summary)?,
                save(out, "vqe_trials", &trials)?,
                save(out, "vqe_trajectories", &traj)?,
                sidecar(out, "vqe", resolved, json!({"trials": wall_times(&results)}), start)?,
            ])
        }
        Command::Sweep { config } => {
            let mut cfg: SweepConfig = load(config)?;
            if let Some(s) = cli.common.seed {
                cfg.base.seed = s;
            }
            if cli.common.full_scale {
                cfg.base.trials = FULL_SCALE_TRIALS;
            }
            let (table, cells) = field_sweep(&cfg, &cache)?;
            let views: Vec<(String, String, &[TrialResult])> =
                cells.iter().map(|c| (c.family.clone(), fmt_f64(c.h), c.trials.as_slice())).collect();
            let (trials, traj) = trial_tables(&views);
            let times: Vec<_> =
                cells.iter().map(|c| json!({"family": c.family, "h": c.h, "trials": wall_times(&c.trials)})).collect();
            Ok(vec![
                save(out, "sweep", &table)?,
                save(out, "sweep_trials", &trials)?,
                save(out, "sweep_trajectories", &traj)?,
                sidecar(out, "sweep", serde_json::to_value(&cfg)?, json!({"cells": times}), start)?,
            ])
        }
    }
}

/// Runs one invocation inside a pool of the requested size.
pub fn run(cli: &Cli) -> RunResult<Written> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.common.threads {
        if k == 0 {
            return Err(RunError::config("--threads", "must be >= 1"));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| RunError::Other(e.into()))?;
    pool.install(|| execute(cli))
}
