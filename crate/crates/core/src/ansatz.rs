//! Circuit families built from 15-parameter Cartan blocks.

use serde::{Deserialize, Serialize};

use crate::circuit::{Block, BlockKind, Circuit, Gate};
use crate::error::{Error, Result};
use crate::models::{Plaquette, ToricLattice};
use crate::pauli::{Letter, PauliString};

/// Parameters per Cartan block.
pub const CARTAN_PARAMS: usize = 15;

/// Gate offsets inside a Cartan block that may serve as the differentiated gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CartanGate {
    /// First `R_y` on the block's second qubit.
    Ry1,
    /// The `R_yy` entangler.
    Ryy,
    /// Second `R_y` on the block's second qubit.
    Ry2,
}

impl CartanGate {
    pub fn offset(self) -> usize {
        match self {
            CartanGate::Ry1 => 4,
            CartanGate::Ryy => 7,
            CartanGate::Ry2 => 13,
        }
    }
}

/// `R3⊗R3 · Rxx · Ryy · Rzz · R3⊗R3` with `R3 = Rz Ry Rz`, in application order:
/// offsets 0-2 on `q1`, 3-5 on `q2`, then `XX`, `YY`, `ZZ`, then 9-11 on `q1`, 12-14 on `q2`.
pub fn cartan_block(n: usize, q1: usize, q2: usize, param_offset: usize) -> Result<Block> {
    if q1 == q2 {
        return Err(Error::Invalid(format!("Cartan block needs two distinct qubits, got {q1} twice")));
    }
    let one = |q: usize, l: Letter| PauliString::single(n, q, l);
    let two = |l: Letter| PauliString::on_qubits(n, &[l, l], &[q1, q2]);
    let r3 = [Letter::Z, Letter::Y, Letter::Z];
    let mut gens = Vec::with_capacity(CARTAN_PARAMS);
    for q in [q1, q2] {
        for l in r3 {
            gens.push(one(q, l)?);
        }
    }
    for l in [Letter::X, Letter::Y, Letter::Z] {
        gens.push(two(l)?);
    }
    for q in [q1, q2] {
        for l in r3 {
            gens.push(one(q, l)?);
        }
    }
    let gates = gens
        .into_iter()
        .enumerate()
        .map(|(i, g)| Gate::param(g, param_offset + i))
        .collect::<Result<Vec<_>>>()?;
    Block::new(gates, BlockKind::Design2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaquetteShape {
    Claw,
    Ushape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Edge {
    Top,
    Left,
    Right,
    Bottom,
}

#[derive(Deserialize)]
struct ShapeTables {
    claw: Vec<[Edge; 2]>,
    ushape: Vec<[Edge; 2]>,
}

const SHAPE_DATA: &str = include_str!("../data/plaquette_shapes.json");

impl PlaquetteShape {
    /// Edge pairs of the blocks inside one plaquette, in application order.
    pub fn slots(self, p: &Plaquette) -> Vec<(usize, usize)> {
        let tables: ShapeTables = serde_json::from_str(SHAPE_DATA).expect("shipped shape table parses");
        let table = match self {
            PlaquetteShape::Claw => tables.claw,
            PlaquetteShape::Ushape => tables.ushape,
        };
        let pick = |e: Edge| match e {
            Edge::Top => p.top,
            Edge::Left => p.left,
            Edge::Right => p.right,
            Edge::Bottom => p.bottom,
        };
        table.iter().map(|[a, b]| (pick(*a), pick(*b))).collect()
    }
}

fn default_rows() -> usize {
    3
}

fn default_shape() -> PlaquetteShape {
    PlaquetteShape::Claw
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnsatzSpec {
    Ladder {
        qubits: usize,
    },
    TwoWayLadder {
        qubits: usize,
    },
    Brickwall {
        qubits: usize,
        layers: usize,
    },
    FldcClaw {
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_rows")]
        cols: usize,
    },
    FldcUshape {
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_rows")]
        cols: usize,
    },
    Fdc {
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_rows")]
        cols: usize,
        #[serde(default = "default_shape")]
        shape: PlaquetteShape,
    },
    Gldc {
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_rows")]
        cols: usize,
        #[serde(default = "default_shape")]
        shape: PlaquetteShape,
        /// Defaults to the qubit count.
        #[serde(default)]
        repetitions: Option<usize>,
    },
}

/// Where a block came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLabel {
    pub block: usize,
    pub qubits: (usize, usize),
    pub plaquette: Option<usize>,
    pub slot: Option<usize>,
    pub repetition: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub circuit: Circuit,
    pub manifest: Vec<BlockLabel>,
    pub lattice: Option<ToricLattice>,
}

struct Builder {
    n: usize,
    blocks: Vec<Block>,
    manifest: Vec<BlockLabel>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { n, blocks: Vec::new(), manifest: Vec::new() }
    }

    fn push(&mut self, q: (usize, usize), plaquette: Option<usize>, slot: Option<usize>, repetition: usize) -> Result<()> {
        let k = self.blocks.len();
        self.blocks.push(cartan_block(self.n, q.0, q.1, k * CARTAN_PARAMS)?);
        self.manifest.push(BlockLabel { block: k, qubits: q, plaquette, slot, repetition });
        Ok(())
    }

    fn finish(self, lattice: Option<ToricLattice>) -> Result<Ansatz> {
        Ok(Ansatz { circuit: Circuit::new(self.n, self.blocks)?, manifest: self.manifest, lattice })
    }
}

fn chain(qubits: usize) -> Result<()> {
    if qubits < 2 {
        return Err(Error::Invalid(format!("need at least 2 qubits, got {qubits}")));
    }
    Ok(())
}

/// Same-slot blocks of every plaquette, slot by slot.
fn push_fdc(b: &mut Builder, lattice: &ToricLattice, shape: PlaquetteShape, repetition: usize) -> Result<()> {
    let plaquettes = lattice.plaquettes();
    let slots: Vec<Vec<(usize, usize)>> = plaquettes.iter().map(|p| shape.slots(p)).collect();
    for s in 0..slots[0].len() {
        for (i, ps) in slots.iter().enumerate() {
            b.push(ps[s], Some(i), Some(s), repetition)?;
        }
    }
    Ok(())
}

impl AnsatzSpec {
    pub fn build(&self) -> Result<Ansatz> {
        match *self {
            AnsatzSpec::Ladder { qubits } => {
                chain(qubits)?;
                let mut b = Builder::new(qubits);
                for i in 0..qubits - 1 {
                    b.push((i, i + 1), None, None, 0)?;
                }
                b.finish(None)
            }
            AnsatzSpec::TwoWayLadder { qubits } => {
                chain(qubits)?;
                let mut b = Builder::new(qubits);
                for i in 0..qubits - 1 {
                    b.push((i, i + 1), None, None, 0)?;
                }
                for i in (0..qubits.saturating_sub(2)).rev() {
                    b.push((i, i + 1), None, None, 1)?;
                }
                b.finish(None)
            }
            AnsatzSpec::Brickwall { qubits, layers } => {
                chain(qubits)?;
                let mut b = Builder::new(qubits);
                for layer in 0..layers {
                    let mut i = layer % 2;
                    while i + 1 < qubits {
                        b.push((i, i + 1), None, None, layer)?;
                        i += 2;
                    }
                }
                b.finish(None)
            }
            AnsatzSpec::FldcClaw { rows, cols } => plaquette_sequential(rows, cols, PlaquetteShape::Claw),
            AnsatzSpec::FldcUshape { rows, cols } => plaquette_sequential(rows, cols, PlaquetteShape::Ushape),
            AnsatzSpec::Fdc { rows, cols, shape } => {
                let lattice = ToricLattice::new(rows, cols)?;
                let mut b = Builder::new(lattice.num_qubits());
                push_fdc(&mut b, &lattice, shape, 0)?;
                b.finish(Some(lattice))
            }
            AnsatzSpec::Gldc { rows, cols, shape, repetitions } => {
                let lattice = ToricLattice::new(rows, cols)?;
                let reps = repetitions.unwrap_or(lattice.num_qubits());
                if reps == 0 {
                    return Err(Error::Invalid("gldc needs at least one repetition".into()));
                }
                let mut b = Builder::new(lattice.num_qubits());
                for r in 0..reps {
                    push_fdc(&mut b, &lattice, shape, r)?;
                }
                b.finish(Some(lattice))
            }
        }
    }

    /// Toric lattice of lattice-based families.
    pub fn lattice(&self) -> Option<ToricLattice> {
        match *self {
            AnsatzSpec::FldcClaw { rows, cols }
            | AnsatzSpec::FldcUshape { rows, cols }
            | AnsatzSpec::Fdc { rows, cols, .. }
            | AnsatzSpec::Gldc { rows, cols, .. } => Some(ToricLattice { rows, cols }),
            _ => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            AnsatzSpec::Ladder { .. } => "ladder",
            AnsatzSpec::TwoWayLadder { .. } => "two_way_ladder",
            AnsatzSpec::Brickwall { .. } => "brickwall",
            AnsatzSpec::FldcClaw { .. } => "fldc_claw",
            AnsatzSpec::FldcUshape { .. } => "fldc_ushape",
            AnsatzSpec::Fdc { .. } => "fdc",
            AnsatzSpec::Gldc { .. } => "gldc",
        }
    }
}

/// Plaquettes left to right, then top to bottom; all blocks of one plaquette
/// before the next.
fn plaquette_sequential(rows: usize, cols: usize, shape: PlaquetteShape) -> Result<Ansatz> {
    let lattice = ToricLattice::new(rows, cols)?;
    let mut b = Builder::new(lattice.num_qubits());
    for (i, p) in lattice.plaquettes().iter().enumerate() {
        for (s, q) in shape.slots(p).into_iter().enumerate() {
            b.push(q, Some(i), Some(s), 0)?;
        }
    }
    b.finish(Some(lattice))
}
