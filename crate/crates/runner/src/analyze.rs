//! Per-parameter exact variance and bounds.

use bpscope_core::bounds::{is_ladder_layout, ladder_bound, theorem1_bound, theorem2_bound};
use bpscope_core::twirl::exact_variance;

use crate::config::AnalyzeConfig;
use crate::error::RunResult;
use crate::output::{fmt_f64, fmt_opt, Table};

pub const ANALYZE_COLUMNS: [&str; 11] = [
    "param_index",
    "block",
    "term_index",
    "pauli",
    "coefficient",
    "variance",
    "pruned_mass",
    "theorem1",
    "theorem2",
    "ladder",
    "path_set",
];

pub fn analyze(cfg: &AnalyzeConfig) -> RunResult<Table> {
    cfg.validate()?;
    let c = cfg.circuit()?;
    let h = cfg.model.build()?;
    let params = cfg.params.clone().unwrap_or_else(|| (0..c.num_params()).collect());
    let ladder = is_ladder_layout(&c);
    let mut table = Table::new(&ANALYZE_COLUMNS);
    for mu in params {
        let exact = exact_variance(&c, &h, mu)?;
        let t1 = theorem1_bound(&c, &h, mu)?;
        let t2 = theorem2_bound(&c, &h, mu)?;
        let lb = if ladder { Some(ladder_bound(&c, &h, mu)?) } else { None };
        for (j, (lambda, p)) in h.terms().iter().enumerate() {
            let path_set = match &t1.per_term[j].path_set {
                Some(ps) => serde_json::to_string(ps)?,
                None => String::new(),
            };
            table.push(vec![
                mu.to_string(),
                c.differential_block(mu)?.to_string(),
                j.to_string(),
                p.to_string(),
                fmt_f64(*lambda),
                fmt_f64(exact.per_term[j].variance),
                fmt_f64(exact.per_term[j].pruned_mass),
                fmt_f64(t1.per_term[j].contribution),
                fmt_f64(t2.per_term[j].contribution),
                fmt_opt(lb.as_ref().map(|l| l.per_term[j].contribution)),
                path_set,
            ]);
        }
    }
    Ok(table)
}
