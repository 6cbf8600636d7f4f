//! Variational training with exact adjoint gradients.

use std::time::Instant;

use bpscope_core::circuit::Circuit;
use bpscope_core::models::{topological_entropy, Hamiltonian};
use bpscope_core::simulator::{adjoint_gradient, energy, run};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::config::{Regions, VqeConfig};
use crate::error::RunResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// Energy before each step plus the final energy.
    pub trajectory: Vec<f64>,
    pub final_energy: f64,
    pub final_s_topo: Option<f64>,
    pub wall_time: f64,
}

impl TrialResult {
    /// Optimizer steps actually taken.
    pub fn iterations_run(&self) -> usize {
        self.trajectory.len() - 1
    }
}

/// SplitMix64 finalizer used to give each trial its own seed.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut z = base.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn train_trial(
    cfg: &VqeConfig,
    c: &Circuit,
    h: &Hamiltonian,
    regions: Option<&Regions>,
    trial: usize,
) -> RunResult<TrialResult> {
    let start = Instant::now();
    let seed = trial_seed(cfg.seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta: Vec<f64> = (0..c.num_params()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    let mut opt = Adam::new(cfg.optimizer, theta.len());
    let mut trajectory = Vec::with_capacity(cfg.iterations + 1);
    for _ in 0..cfg.iterations {
        let (e, g) = adjoint_gradient(c, &theta, h)?;
        trajectory.push(e);
        if let Some(stop) = cfg.early_stop {
            let t = trajectory.len();
            if t > stop.window && trajectory[t - 1 - stop.window] - e < stop.tolerance {
                break;
            }
        }
        opt.step(&mut theta, &g);
    }
    let final_energy = energy(c, &theta, h)?;
    trajectory.push(final_energy);
    let final_s_topo = match regions {
        Some(r) => {
            let (a, b, cc) = r.masks();
            Some(topological_entropy(&run(c, &theta)?, a, b, cc)?)
        }
        None => None,
    };
    Ok(TrialResult { trial, seed, trajectory, final_energy, final_s_topo, wall_time: start.elapsed().as_secs_f64() })
}

/// Every trial of `cfg`, in trial order.
pub fn vqe_train(cfg: &VqeConfig) -> RunResult<Vec<TrialResult>> {
    cfg.validate()?;
    let c = cfg.circuit()?;
    let h = cfg.model.build()?;
    let regions = cfg.resolved_regions();
    let mut out = (0..cfg.trials)
        .into_par_iter()
        .map(|t| train_trial(cfg, &c, &h, regions.as_ref(), t))
        .collect::<RunResult<Vec<_>>>()?;
    out.sort_by_key(|r| r.trial);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub s_topo_mean: Option<f64>,
    pub s_topo_std: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// The `count` lowest final energies, ties broken by trial id.
pub fn best_trials(results: &[TrialResult], count: usize) -> Vec<&TrialResult> {
    let mut sorted: Vec<&TrialResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.final_energy.total_cmp(&b.final_energy).then(a.trial.cmp(&b.trial)));
    sorted.truncate(count);
    sorted
}

/// Mean and population standard deviation over the best trials.
pub fn summarize(results: &[TrialResult], count: usize) -> Summary {
    let best = best_trials(results, count);
    let energies: Vec<f64> = best.iter().map(|r| r.final_energy).collect();
    let (energy_mean, energy_std) = mean_std(&energies);
    let s: Option<Vec<f64>> = best.iter().map(|r| r.final_s_topo).collect();
    let (s_topo_mean, s_topo_std) = match s {
        Some(v) => {
            let (m, sd) = mean_std(&v);
            (Some(m), Some(sd))
        }
        None => (None, None),
    };
    Summary { count: best.len(), energy_mean, energy_std, s_topo_mean, s_topo_std }
}
