use std::path::Path;

use bpscope_core::circuit::{Block, BlockKind, Circuit, Gate};
use bpscope_core::models::{ground_energy, Hamiltonian};
use bpscope_core::pauli::PauliString;
use bpscope_runner::cache::EdCache;
use bpscope_runner::cli::{run, Cli};
use bpscope_runner::config::{load, parse, AnalyzeConfig, SweepConfig, VarianceConfig, VqeConfig};
use bpscope_runner::scan::variance_scan;
use bpscope_runner::sweep::field_sweep;
use bpscope_runner::vqe::{best_trials, summarize, train_trial, TrialResult};
use bpscope_runner::RunError;
use clap::Parser;

fn p(n: usize, s: &str) -> PauliString {
    PauliString::parse(s, Some(n)).unwrap()
}

fn vqe_config(extra: &str) -> VqeConfig {
    parse(&format!(
        r#"{{"ansatz": {{"family": "ladder", "qubits": 2}},
            "model": {{"kind": "pauli", "qubits": 2, "terms": [{{"coefficient": 1.0, "pauli": "ZZ"}}]}}
            {extra}}}"#
    ))
    .unwrap()
}

fn column(t: &bpscope_runner::output::Table, name: &str) -> Vec<f64> {
    t.column(name).unwrap().into_iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn single_rotation_reaches_minimum() {
    let c = Circuit::new(1, vec![Block::new(vec![Gate::param(p(1, "Y"), 0).unwrap()], BlockKind::Design2).unwrap()]).unwrap();
    let h = Hamiltonian::new(1, vec![(-1.0, p(1, "Z"))]).unwrap();
    let cfg = vqe_config(r#", "iterations": 200, "early_stop": null, "optimizer": {"learning_rate": 0.05}"#);
    for trial in 0..3 {
        let r = train_trial(&cfg, &c, &h, None, trial).unwrap();
        assert_eq!(r.trajectory.len(), 201);
        assert!((r.final_energy + 1.0).abs() < 1e-6, "trial {trial}: {}", r.final_energy);
    }
}

#[test]
fn cartan_block_reaches_minimum() {
    let cfg = vqe_config(r#", "iterations": 400, "trials": 5, "seed": 3"#);
    let results = bpscope_runner::vqe::vqe_train(&cfg).unwrap();
    let best = best_trials(&results, 1)[0];
    assert!((best.final_energy + 1.0).abs() < 1e-4, "{}", best.final_energy);
    for r in &results {
        assert!(r.trajectory.len() <= 401);
    }
}

fn fake(trial: usize, e: f64) -> TrialResult {
    TrialResult { trial, seed: 0, trajectory: vec![e], final_energy: e, final_s_topo: Some(-e), wall_time: 0.0 }
}

#[test]
fn best_fraction_rounds_up() {
    let mut cfg = vqe_config(r#", "trials": 5, "best_fraction": 0.5"#);
    assert_eq!(cfg.best_count(), 3);
    cfg.best_fraction = 1.0;
    assert_eq!(cfg.best_count(), 5);
    let rs: Vec<_> = [3.0, -1.0, 2.0, -1.0, 0.0].iter().enumerate().map(|(i, &e)| fake(i, e)).collect();
    let best: Vec<usize> = best_trials(&rs, 3).iter().map(|r| r.trial).collect();
    assert_eq!(best, vec![1, 3, 4]);
    let s = summarize(&rs, 3);
    assert!((s.energy_mean + 2.0 / 3.0).abs() < 1e-15);
    assert!((s.s_topo_mean.unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn invalid_configs_name_the_field() {
    let err = parse::<VqeConfig>(r#"{"ansatz": {"family": "ladder", "qubits": 2}, "model": {"kind": "toric_code"}, "trials": "x"}"#).unwrap_err();
    assert!(matches!(&err, RunError::Config { path, .. } if path == "trials"), "{err}");
    let cfg = vqe_config(r#", "best_fraction": 0.0"#);
    assert!(matches!(cfg.validate(), Err(RunError::Config { path, .. }) if path == "best_fraction"));
    let cfg = vqe_config(r#", "optimizer": {"learning_rate": -1}"#);
    assert!(matches!(cfg.validate(), Err(RunError::Config { path, .. }) if path == "optimizer.learning_rate"));
    let cfg = vqe_config(r#", "trials": 0"#);
    assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
}

#[test]
fn sweep_rejects_empty_families() {
    let cfg: SweepConfig = parse(
        r#"{"base": {"ansatz": {"family": "fldc_claw"}, "model": {"kind": "toric_code"}}, "families": [], "fields": [0.0]}"#,
    )
    .unwrap();
    assert!(matches!(field_sweep(&cfg, &EdCache::default()), Err(RunError::Config { .. })));
}

#[test]
fn sweep_reports_exact_reference() {
    let cfg: SweepConfig = parse(
        r#"{"base": {"ansatz": {"family": "fldc_claw", "rows": 2, "cols": 2},
                     "model": {"kind": "toric_code", "rows": 2, "cols": 2},
                     "iterations": 5, "trials": 2},
            "families": [{"family": "fldc_claw", "rows": 2, "cols": 2}],
            "fields": [0.1], "direction": [1.0, 0.0, 1.0]}"#,
    )
    .unwrap();
    let (t, cells) = field_sweep(&cfg, &EdCache::default()).unwrap();
    assert_eq!(cells.len(), 1);
    let ed = column(&t, "ed_energy")[0];
    let model = cfg.base.model.with_field(bpscope_core::models::Field::new(0.1, 0.0, 0.1)).build().unwrap();
    assert!((ed - ground_energy(&model).unwrap()).abs() < 1e-12);
    assert!(column(&t, "energy_mean")[0] >= ed - 1e-9);
}

#[test]
fn vs_n_exact_settles_with_size() {
    let cfg: VarianceConfig = parse(r#"{"scan": "vs_n", "sizes": [4, 5, 6, 7, 8, 9, 10], "delta_k": 1}"#).unwrap();
    let t = variance_scan(&cfg).unwrap();
    let v = column(&t, "variance");
    let steps: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(steps.windows(2).all(|s| s[1] < s[0]), "{v:?}");
    let last = v[v.len() - 1];
    assert!(v.iter().all(|x| (x / last - 1.0).abs() < 0.35), "{v:?}");
    assert!(v[v.len() - 3..].iter().all(|x| (x / last - 1.0).abs() < 0.01), "{v:?}");
    let t1 = column(&t, "theorem1");
    let t2 = column(&t, "theorem2");
    for i in 0..v.len() {
        assert!(v[i] >= t1[i] && t1[i] >= t2[i]);
    }
}

#[test]
fn vs_delta_k_exact_decays_exponentially() {
    let cfg: VarianceConfig = parse(r#"{"scan": "vs_delta_k", "qubits": 8, "delta_ks": [0, 1, 2, 3, 4, 5]}"#).unwrap();
    let v = column(&variance_scan(&cfg).unwrap(), "variance");
    assert!(v.windows(2).all(|w| w[1] < w[0]));
    let xs: Vec<f64> = (0..v.len()).map(|x| x as f64).collect();
    let ys: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    assert!(r_squared(&xs, &ys) > 0.99);
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

#[test]
fn sampled_rows_match_exact_rows() {
    let cfg: VarianceConfig = parse(
        r#"{"scan": "vs_delta_k", "qubits": 4, "delta_ks": [0, 1, 2], "estimators": ["exact", "mc"],
            "mc": {"samples": 3000, "mode": "haar-sandwich"}, "seed": 9}"#,
    )
    .unwrap();
    let t = variance_scan(&cfg).unwrap();
    let v = column(&t, "variance");
    let est = t.column("estimator").unwrap();
    let se = t.column("std_error").unwrap();
    for i in (0..t.rows.len()).step_by(2) {
        assert_eq!((est[i], est[i + 1]), ("exact", "mc"));
        let err: f64 = se[i + 1].parse().unwrap();
        assert!((v[i] - v[i + 1]).abs() < 3.0 * err, "row {i}: {} vs {} ± {err}", v[i], v[i + 1]);
    }
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn cli(args: &[&str]) -> Cli {
    Cli::parse_from(std::iter::once("bpscope").chain(args.iter().copied()))
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let vqe = write(dir.path(), "vqe.json", r#"{"ansatz": {"family": "fldc_claw", "rows": 2, "cols": 2}, "model": {"kind": "toric_code", "rows": 2, "cols": 2}, "iterations": 20, "trials": 3, "seed": 5}"#);
    let var = write(dir.path(), "var.json", r#"{"scan": "vs_n", "sizes": [3, 4], "delta_k": 0, "estimators": ["exact", "mc"], "mc": {"samples": 200}}"#);
    for (cmd, cfg, csv) in [("vqe", &vqe, "vqe_trajectories.csv"), ("variance", &var, "variance.csv")] {
        let mut bodies = Vec::new();
        for run_id in 0..2 {
            let out = dir.path().join(format!("{cmd}{run_id}"));
            let threads = if run_id == 0 { "1" } else { "2" };
            run(&cli(&[cmd, cfg, "--out", out.to_str().unwrap(), "--seed", "11", "--threads", threads])).unwrap();
            bodies.push(std::fs::read(out.join(csv)).unwrap());
        }
        assert_eq!(bodies[0], bodies[1], "{cmd}");
    }
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let bad = write(dir.path(), "bad.json", r#"{"scan": "vs_n", "sizes": []}"#);
    let e = run(&cli(&["variance", &bad, "--out", out.to_str().unwrap()])).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let structured = write(
        dir.path(),
        "structured.json",
        r#"{"circuit": {"qubits": 2, "blocks": [{"kind": "structured", "gates": [{"generator": "ZZ", "param": 0}]}]},
            "model": {"kind": "pauli", "qubits": 2, "terms": [{"coefficient": 1.0, "pauli": "ZI"}]}}"#,
    );
    let e = run(&cli(&["analyze", &structured, "--out", out.to_str().unwrap()])).unwrap_err();
    assert_eq!(e.exit_code(), 3, "{e}");
    let ok = write(
        dir.path(),
        "ok.json",
        r#"{"ansatz": {"family": "ladder", "qubits": 4},
            "model": {"kind": "pauli", "qubits": 4, "terms": [{"coefficient": 1.0, "pauli": "Z@[3]"}]}, "params": [7]}"#,
    );
    run(&cli(&["analyze", &ok, "--out", out.to_str().unwrap()])).unwrap();
    let csv = std::fs::read_to_string(out.join("analyze.csv")).unwrap();
    assert!(csv.contains("[[0,1,2]]"), "{csv}");
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let checked = match name.split('_').next().unwrap() {
            "analyze" => load::<AnalyzeConfig>(&path).and_then(|c| c.validate()),
            "variance" => load::<VarianceConfig>(&path).and_then(|c| c.validate()),
            "vqe" => load::<VqeConfig>(&path).and_then(|c| c.validate()),
            "sweep" => load::<SweepConfig>(&path).and_then(|c| c.validate()),
            other => panic!("unexpected config prefix {other}"),
        };
        checked.unwrap_or_else(|e| panic!("{name}: {e}"));
        seen += 1;
    }
    assert!(seen >= 4);
}
