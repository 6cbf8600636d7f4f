//! Converged energy and topological entropy against field strength.

use bpscope_core::models::Field;

use crate::cache::EdCache;
use crate::config::SweepConfig;
use crate::error::RunResult;
use crate::output::{fmt_f64, fmt_opt, Table};
use crate::vqe::{summarize, vqe_train, TrialResult};

pub const SWEEP_COLUMNS: [&str; 11] = [
    "family",
    "h",
    "qubits",
    "best_count",
    "energy_mean",
    "energy_std",
    "energy_per_site",
    "s_topo_mean",
    "s_topo_std",
    "ed_energy",
    "ed_energy_per_site",
];

pub struct SweepCell {
    pub family: String,
    pub h: f64,
    pub trials: Vec<TrialResult>,
}

/// Cells in family-major, field-minor order.
pub fn field_sweep(cfg: &SweepConfig, cache: &EdCache) -> RunResult<(Table, Vec<SweepCell>)> {
    cfg.validate()?;
    let mut table = Table::new(&SWEEP_COLUMNS);
    let mut cells = Vec::new();
    for family in &cfg.families {
        for &h in &cfg.fields {
            let mut cell = cfg.base.clone();
            cell.ansatz = family.clone();
            let d = cfg.direction;
            cell.model = cfg.base.model.with_field(Field::new(h * d[0], h * d[1], h * d[2]));
            let trials = vqe_train(&cell)?;
            let s = summarize(&trials, cell.best_count());
            let ham = cell.model.build()?;
            let n = ham.num_qubits() as f64;
            let ed = cache.ground_energy(&ham)?;
            table.push(vec![
                family.family_name().into(),
                fmt_f64(h),
                ham.num_qubits().to_string(),
                s.count.to_string(),
                fmt_f64(s.energy_mean),
                fmt_f64(s.energy_std),
                fmt_f64(s.energy_mean / n),
                fmt_opt(s.s_topo_mean),
                fmt_opt(s.s_topo_std),
                fmt_f64(ed),
                fmt_f64(ed / n),
            ]);
            cells.push(SweepCell { family: family.family_name().into(), h, trials });
        }
    }
    Ok((table, cells))
}
