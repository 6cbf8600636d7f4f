//! Gradient-variance scans along ladder circuits.

use bpscope_core::ansatz::CARTAN_PARAMS;
use bpscope_core::bounds::{is_ladder_layout, ladder_bound, theorem1_bound, theorem2_bound};
use bpscope_core::models::Hamiltonian;
use bpscope_core::pauli::{Letter, PauliString};
use bpscope_core::simulator::mc_variance;
use bpscope_core::twirl::exact_variance;

use crate::config::{Estimator, VarianceConfig};
use crate::error::RunResult;
use crate::output::{fmt_f64, fmt_opt, Table};
use crate::vqe::trial_seed;

pub const SCAN_COLUMNS: [&str; 14] = [
    "n",
    "delta_k",
    "block",
    "param_index",
    "estimator",
    "mode",
    "samples",
    "seed",
    "mean",
    "variance",
    "std_error",
    "theorem1",
    "theorem2",
    "ladder",
];

/// One row per `(point, estimator)` in configuration order.
pub fn variance_scan(cfg: &VarianceConfig) -> RunResult<Table> {
    cfg.validate()?;
    let mut table = Table::new(&SCAN_COLUMNS);
    for (row, (n, dk)) in cfg.points().into_iter().enumerate() {
        let c = cfg.ansatz(n).build()?.circuit;
        let kd = c.num_blocks() - 1 - dk;
        let mu = kd * CARTAN_PARAMS + cfg.gate.offset();
        let h = Hamiltonian::new(n, vec![(1.0, PauliString::single(n, n - 1, Letter::Z)?)])?;
        let t1 = theorem1_bound(&c, &h, mu)?.total;
        let t2 = theorem2_bound(&c, &h, mu)?.total;
        let lb = if is_ladder_layout(&c) { Some(ladder_bound(&c, &h, mu)?.total) } else { None };
        for est in &cfg.estimators {
            let head = vec![n.to_string(), dk.to_string(), kd.to_string(), mu.to_string()];
            let tail = vec![fmt_f64(t1), fmt_f64(t2), fmt_opt(lb)];
            let middle = match est {
                Estimator::Exact => {
                    let v = exact_variance(&c, &h, mu)?.total;
                    vec!["exact".into(), String::new(), String::new(), String::new(), String::new(), fmt_f64(v), String::new()]
                }
                Estimator::Mc => {
                    let mc = cfg.mc.expect("validated");
                    let seed = trial_seed(cfg.seed, row);
                    let s = mc_variance(&c, &h, mu, mc.samples, mc.mode, seed)?;
                    vec![
                        "mc".into(),
                        mc.mode.as_str().into(),
                        mc.samples.to_string(),
                        seed.to_string(),
                        fmt_f64(s.mean),
                        fmt_f64(s.variance),
                        fmt_f64(s.std_error),
                    ]
                }
            };
            table.push(head.into_iter().chain(middle).chain(tail).collect());
        }
    }
    Ok(table)
}
