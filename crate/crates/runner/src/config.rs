//! JSON experiment configurations.

use std::path::Path;

use bpscope_core::ansatz::{AnsatzSpec, CartanGate};
use bpscope_core::circuit::{Circuit, CircuitSpec};
use bpscope_core::models::{toric_code, Field, Hamiltonian, HamiltonianSpec, TermSpec, ToricLattice};
use bpscope_core::pauli::{mask_of, QubitMask};
use bpscope_core::simulator::McMode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{RunError, RunResult};

/// Reads a config, reporting the JSON path of the first offending field.
pub fn load<T: DeserializeOwned>(path: &Path) -> RunResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::config(path.display().to_string(), format!("cannot read: {e}")))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> RunResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| RunError::config(e.path().to_string(), e.inner().to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Toric code on a `rows × cols`-vertex open lattice.
    ToricCode {
        #[serde(default = "three")]
        rows: usize,
        #[serde(default = "three")]
        cols: usize,
        #[serde(default = "zero_field")]
        field: Field,
        /// Overrides the max-norm of `field` in the `(1 - h)` prefactor.
        #[serde(default)]
        prefactor: Option<f64>,
    },
    /// Explicit Pauli sum.
    Pauli { qubits: usize, terms: Vec<TermSpec> },
}

fn three() -> usize {
    3
}

fn zero_field() -> Field {
    Field::new(0.0, 0.0, 0.0)
}

impl ModelSpec {
    pub fn build(&self) -> RunResult<Hamiltonian> {
        match self {
            ModelSpec::ToricCode { rows, cols, field, prefactor } => {
                let lattice =
                    ToricLattice::new(*rows, *cols).map_err(|e| RunError::config("model", e.to_string()))?;
                Ok(toric_code(&lattice, *field, *prefactor)?)
            }
            ModelSpec::Pauli { qubits, terms } => HamiltonianSpec { qubits: *qubits, terms: terms.clone() }
                .build()
                .map_err(|e| RunError::config("model", e.to_string())),
        }
    }

    /// Same model with the field replaced.
    pub fn with_field(&self, f: Field) -> ModelSpec {
        match self {
            ModelSpec::ToricCode { rows, cols, prefactor, .. } => {
                ModelSpec::ToricCode { rows: *rows, cols: *cols, field: f, prefactor: *prefactor }
            }
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default = "adam")]
    pub kind: OptimizerKind,
    #[serde(default = "lr")]
    pub learning_rate: f64,
    #[serde(default = "beta1")]
    pub beta1: f64,
    #[serde(default = "beta2")]
    pub beta2: f64,
    #[serde(default = "eps")]
    pub epsilon: f64,
}

fn adam() -> OptimizerKind {
    OptimizerKind::Adam
}
fn lr() -> f64 {
    0.01
}
fn beta1() -> f64 {
    0.9
}
fn beta2() -> f64 {
    0.999
}
fn eps() -> f64 {
    1e-8
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec { kind: adam(), learning_rate: lr(), beta1: beta1(), beta2: beta2(), epsilon: eps() }
    }
}

/// Stop once the energy improved by less than `tolerance` over the last `window` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStop {
    pub window: usize,
    pub tolerance: f64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        EarlyStop { window: 50, tolerance: 1e-8 }
    }
}

/// Qubit regions for the topological entropy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regions {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl Regions {
    pub fn masks(&self) -> (QubitMask, QubitMask, QubitMask) {
        (mask_of(&self.a), mask_of(&self.b), mask_of(&self.c))
    }

    /// Shipped regions for a `rows × cols`-vertex lattice, if any.
    pub fn default_for(rows: usize, cols: usize) -> Option<Regions> {
        #[derive(Deserialize)]
        struct Entry {
            rows: usize,
            cols: usize,
            a: Vec<usize>,
            b: Vec<usize>,
            c: Vec<usize>,
        }
        #[derive(Deserialize)]
        struct Shipped {
            lattices: Vec<Entry>,
        }
        let shipped: Shipped = serde_json::from_str(include_str!("../data/regions.json")).expect("regions data parses");
        shipped
            .lattices
            .into_iter()
            .find(|e| (e.rows, e.cols) == (rows, cols))
            .map(|e| Regions { a: e.a, b: e.b, c: e.c })
    }
}

pub(crate) fn trials_default() -> usize {
    20
}
fn fraction_default() -> f64 {
    0.5
}
fn iterations_default() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeConfig {
    pub ansatz: AnsatzSpec,
    pub model: ModelSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default = "iterations_default")]
    pub iterations: usize,
    /// `null` disables early stopping.
    #[serde(default = "early_default")]
    pub early_stop: Option<EarlyStop>,
    #[serde(default = "trials_default")]
    pub trials: usize,
    #[serde(default = "fraction_default")]
    pub best_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the shipped regions for the model lattice, if any.
    #[serde(default)]
    pub regions: Option<Regions>,
}

fn early_default() -> Option<EarlyStop> {
    Some(EarlyStop::default())
}

impl VqeConfig {
    pub fn validate(&self) -> RunResult<()> {
        let o = &self.optimizer;
        if !(o.learning_rate > 0.0) {
            return Err(RunError::config("optimizer.learning_rate", "must be > 0"));
        }
        if !(0.0..1.0).contains(&o.beta1) {
            return Err(RunError::config("optimizer.beta1", "must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&o.beta2) {
            return Err(RunError::config("optimizer.beta2", "must lie in [0, 1)"));
        }
        if !(o.epsilon > 0.0) {
            return Err(RunError::config("optimizer.epsilon", "must be > 0"));
        }
        if !(self.best_fraction > 0.0 && self.best_fraction <= 1.0) {
            return Err(RunError::config("best_fraction", "must lie in (0, 1]"));
        }
        if self.trials == 0 {
            return Err(RunError::config("trials", "must be >= 1"));
        }
        if let Some(e) = &self.early_stop {
            if e.window == 0 {
                return Err(RunError::config("early_stop.window", "must be >= 1"));
            }
        }
        let c = self.circuit()?;
        let h = self.model.build()?;
        if c.num_qubits() != h.num_qubits() {
            return Err(RunError::config(
                "model",
                format!("model has {} qubits, ansatz {}", h.num_qubits(), c.num_qubits()),
            ));
        }
        if let Some(r) = &self.resolved_regions() {
            let (a, b, cc) = r.masks();
            let n = c.num_qubits();
            if r.a.iter().chain(&r.b).chain(&r.c).any(|&q| q >= n) || a & b != 0 || b & cc != 0 || a & cc != 0 {
                return Err(RunError::config("regions", "must be disjoint qubit lists inside the register"));
            }
        }
        Ok(())
    }

    pub fn circuit(&self) -> RunResult<Circuit> {
        Ok(self.ansatz.build().map_err(|e| RunError::config("ansatz", e.to_string()))?.circuit)
    }

    pub fn resolved_regions(&self) -> Option<Regions> {
        self.regions.clone().or_else(|| match &self.model {
            ModelSpec::ToricCode { rows, cols, .. } => Regions::default_for(*rows, *cols),
            _ => None,
        })
    }

    pub fn best_count(&self) -> usize {
        ((self.trials as f64 * self.best_fraction).ceil() as usize).clamp(1, self.trials)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Template for every cell; its `ansatz` is replaced per family.
    pub base: VqeConfig,
    pub families: Vec<AnsatzSpec>,
    /// Field magnitudes `h`.
    pub fields: Vec<f64>,
    /// Field triple is `h · direction`.
    #[serde(default = "diagonal")]
    pub direction: [f64; 3],
}

fn diagonal() -> [f64; 3] {
    [1.0, 0.0, 1.0]
}

impl SweepConfig {
    pub fn validate(&self) -> RunResult<()> {
        if self.families.is_empty() {
            return Err(RunError::config("families", "empty family list"));
        }
        if self.fields.is_empty() {
            return Err(RunError::config("fields", "empty field grid"));
        }
        if !matches!(self.base.model, ModelSpec::ToricCode { .. }) {
            return Err(RunError::config("base.model", "field sweeps need the toric_code model"));
        }
        for (i, f) in self.families.iter().enumerate() {
            let mut cfg = self.base.clone();
            cfg.ansatz = f.clone();
            cfg.validate().map_err(|e| match e {
                RunError::Config { path, message } => RunError::config(format!("families[{i}]/{path}"), message),
                other => other,
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    VsN,
    VsDeltaK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanFamily {
    Ladder,
    TwoWayLadder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub samples: usize,
    #[serde(default = "sandwich")]
    pub mode: McMode,
}

fn sandwich() -> McMode {
    McMode::HaarSandwich
}

/// Gradient variance of `Z` on the last qubit along a ladder family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    pub scan: ScanKind,
    #[serde(default = "ladder")]
    pub family: ScanFamily,
    /// Qubit counts for `vs_n`.
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Fixed block distance for `vs_n`.
    #[serde(default)]
    pub delta_k: usize,
    /// Qubit count for `vs_delta_k`.
    #[serde(default)]
    pub qubits: usize,
    /// Block distances for `vs_delta_k`.
    #[serde(default)]
    pub delta_ks: Vec<usize>,
    /// Differentiated gate inside the Cartan block.
    #[serde(default = "ryy")]
    pub gate: CartanGate,
    #[serde(default = "exact")]
    pub estimators: Vec<Estimator>,
    #[serde(default)]
    pub mc: Option<McSpec>,
    #[serde(default)]
    pub seed: u64,
}

fn ladder() -> ScanFamily {
    ScanFamily::Ladder
}
fn ryy() -> CartanGate {
    CartanGate::Ryy
}
fn exact() -> Vec<Estimator> {
    vec![Estimator::Exact]
}

impl VarianceConfig {
    pub fn validate(&self) -> RunResult<()> {
        let points: Vec<(usize, usize)> = self.points();
        if points.is_empty() {
            return Err(RunError::config(
                match self.scan {
                    ScanKind::VsN => "sizes",
                    ScanKind::VsDeltaK => "delta_ks",
                },
                "empty scan",
            ));
        }
        for (n, dk) in points {
            if n < 2 {
                return Err(RunError::config("sizes", format!("{n} qubits is too few")));
            }
            let blocks = self.blocks_for(n);
            if dk >= blocks {
                return Err(RunError::config("delta_k", format!("distance {dk} needs more than {blocks} blocks")));
            }
        }
        if self.estimators.is_empty() {
            return Err(RunError::config("estimators", "no estimator selected"));
        }
        if self.estimators.contains(&Estimator::Mc) {
            match &self.mc {
                None => return Err(RunError::config("mc", "required by the mc estimator")),
                Some(m) if m.samples < 2 => return Err(RunError::config("mc.samples", "must be >= 2")),
                _ => {}
            }
        }
        Ok(())
    }

    /// `(N, Δk)` rows in scan order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        match self.scan {
            ScanKind::VsN => self.sizes.iter().map(|&n| (n, self.delta_k)).collect(),
            ScanKind::VsDeltaK => self.delta_ks.iter().map(|&d| (self.qubits, d)).collect(),
        }
    }

    pub fn ansatz(&self, n: usize) -> AnsatzSpec {
        match self.family {
            ScanFamily::Ladder => AnsatzSpec::Ladder { qubits: n },
            ScanFamily::TwoWayLadder => AnsatzSpec::TwoWayLadder { qubits: n },
        }
    }

    fn blocks_for(&self, n: usize) -> usize {
        match self.family {
            ScanFamily::Ladder => n - 1,
            ScanFamily::TwoWayLadder => 2 * n - 3,
        }
    }
}

/// Exact variance and bounds for every parameter of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    #[serde(default)]
    pub ansatz: Option<AnsatzSpec>,
    #[serde(default)]
    pub circuit: Option<CircuitSpec>,
    pub model: ModelSpec,
    /// Defaults to every parameter.
    #[serde(default)]
    pub params: Option<Vec<usize>>,
}

impl AnalyzeConfig {
    pub fn circuit(&self) -> RunResult<Circuit> {
        match (&self.ansatz, &self.circuit) {
            (Some(a), None) => Ok(a.build().map_err(|e| RunError::config("ansatz", e.to_string()))?.circuit),
            (None, Some(c)) => c.build().map_err(|e| RunError::config("circuit", e.to_string())),
            _ => Err(RunError::config("circuit", "give exactly one of ansatz and circuit")),
        }
    }

    pub fn validate(&self) -> RunResult<()> {
        let c = self.circuit()?;
        let h = self.model.build()?;
        if c.num_qubits() != h.num_qubits() {
            return Err(RunError::config("model", "qubit count differs from the circuit"));
        }
        if let Some(ps) = &self.params {
            if let Some(&bad) = ps.iter().find(|&&p| p >= c.num_params()) {
                return Err(RunError::config("params", format!("index {bad} out of range")));
            }
        }
        Ok(())
    }
}
