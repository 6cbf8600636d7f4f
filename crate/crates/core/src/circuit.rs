//! Block-structured circuit representation and the support geometry queries
//! used by the bounds and the twirl engine.
//!
//! Blocks are stored in application order: block 0 acts first on `|0...0>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{qubits_of, PauliString, QubitMask};

/// Angle source of a rotation gate `exp(-i θ P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    generator: PauliString,
    angle: Angle,
}

impl Gate {
    pub fn new(generator: PauliString, angle: Angle) -> Result<Self> {
        if generator.phase_exponent() != 0 {
            return Err(Error::InvalidCircuit(format!("generator {generator} must have phase +1")));
        }
        if generator.is_identity() {
            return Err(Error::InvalidCircuit("identity generator".into()));
        }
        Ok(Gate { generator, angle })
    }

    pub fn param(generator: PauliString, index: usize) -> Result<Self> {
        Self::new(generator, Angle::Param(index))
    }

    pub fn fixed(generator: PauliString, angle: f64) -> Result<Self> {
        Self::new(generator, Angle::Fixed(angle))
    }

    pub fn generator(&self) -> &PauliString {
        &self.generator
    }

    pub fn angle(&self) -> Angle {
        self.angle
    }

    pub fn parameter_index(&self) -> Option<usize> {
        match self.angle {
            Angle::Param(i) => Some(i),
            Angle::Fixed(_) => None,
        }
    }

    /// Rotation angle under the parameter vector `theta`.
    pub fn resolve(&self, theta: &[f64]) -> f64 {
        match self.angle {
            Angle::Param(i) => theta[i],
            Angle::Fixed(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Treated as an independent local 2-design on its support.
    Design2,
    /// Any other gate sequence; excluded from the 2-design analyses.
    Structured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    gates: Vec<Gate>,
    support: QubitMask,
    kind: BlockKind,
}

impl Block {
    pub fn new(gates: Vec<Gate>, kind: BlockKind) -> Result<Self> {
        let support = gates.iter().fold(0, |m, g| m | g.generator.support());
        if support == 0 {
            return Err(Error::InvalidCircuit("block with empty support".into()));
        }
        Ok(Block { gates, support, kind })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn support(&self) -> QubitMask {
        self.support
    }

    pub fn size(&self) -> usize {
        self.support.count_ones() as usize
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    qubits: usize,
    blocks: Vec<Block>,
    /// `param_site[μ] = (block, gate)` locating parameter μ.
    param_site: Vec<(usize, usize)>,
}

impl Circuit {
    pub fn new(qubits: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut sites: Vec<Option<(usize, usize)>> = Vec::new();
        for (k, b) in blocks.iter().enumerate() {
            for (g, gate) in b.gates.iter().enumerate() {
                if gate.generator.num_qubits() != qubits {
                    return Err(Error::Dimension(format!(
                        "block {k} gate {g}: generator on {} qubits, circuit has {qubits}",
                        gate.generator.num_qubits()
                    )));
                }
                if let Some(i) = gate.parameter_index() {
                    if sites.len() <= i {
                        sites.resize(i + 1, None);
                    }
                    if sites[i].is_some() {
                        return Err(Error::InvalidCircuit(format!("parameter {i} used twice")));
                    }
                    sites[i] = Some((k, g));
                }
            }
        }
        let param_site = sites
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| Error::InvalidCircuit(format!("parameter index {i} missing"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit { qubits, blocks, param_site })
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_params(&self) -> usize {
        self.param_site.len()
    }

    pub fn block(&self, k: usize) -> Result<&Block> {
        self.blocks.get(k).ok_or(Error::BlockOutOfRange { index: k, blocks: self.blocks.len() })
    }

    /// `(block, gate)` position of parameter `mu`.
    pub fn param_site(&self, mu: usize) -> Result<(usize, usize)> {
        self.param_site
            .get(mu)
            .copied()
            .ok_or(Error::ParamOutOfRange { index: mu, params: self.param_site.len() })
    }

    /// Block holding parameter `mu`.
    pub fn differential_block(&self, mu: usize) -> Result<usize> {
        Ok(self.param_site(mu)?.0)
    }

    pub fn param_gate(&self, mu: usize) -> Result<&Gate> {
        let (k, g) = self.param_site(mu)?;
        Ok(&self.blocks[k].gates[g])
    }

    /// Union of all block supports.
    pub fn support(&self) -> QubitMask {
        self.blocks.iter().fold(0, |m, b| m | b.support)
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Block::size).max().unwrap_or(0)
    }

    pub fn all_design2(&self) -> bool {
        self.blocks.iter().all(|b| b.kind == BlockKind::Design2)
    }

    pub fn local_depth(&self, q: usize) -> Result<usize> {
        if q >= self.qubits {
            return Err(Error::QubitOutOfRange { qubit: q, qubits: self.qubits });
        }
        Ok(self.blocks.iter().filter(|b| b.support >> q & 1 == 1).count())
    }

    pub fn max_local_depth(&self) -> usize {
        (0..self.qubits).map(|q| self.local_depth(q).unwrap_or(0)).max().unwrap_or(0)
    }

    /// Greedy layering by support-disjointness.
    pub fn global_depth(&self) -> usize {
        let mut layer_of = Vec::with_capacity(self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            let layer = (0..k)
                .filter(|&j| self.blocks[j].support & b.support != 0)
                .map(|j| layer_of[j] + 1)
                .max()
                .unwrap_or(0);
            layer_of.push(layer);
        }
        layer_of.iter().map(|l| l + 1).max().unwrap_or(0)
    }

    fn union_between(&self, lo: usize, hi: usize) -> QubitMask {
        self.blocks[lo + 1..hi].iter().fold(0, |m, b| m | b.support)
    }

    /// Qubits shared by two blocks and untouched by every block strictly between them.
    pub fn connecting_support(&self, k: usize, k2: usize) -> Result<QubitMask> {
        self.block(k)?;
        self.block(k2)?;
        if k == k2 {
            return Err(Error::Invalid("connecting support of a block with itself".into()));
        }
        let (lo, hi) = if k < k2 { (k, k2) } else { (k2, k) };
        Ok(self.blocks[lo].support & self.blocks[hi].support & !self.union_between(lo, hi))
    }

    /// Qubits of block `k` untouched by any earlier block.
    pub fn forward_residual_support(&self, k: usize) -> Result<QubitMask> {
        let b = self.block(k)?;
        let before = self.blocks[..k].iter().fold(0, |m, b| m | b.support);
        Ok(b.support & !before)
    }

    /// Qubits of block `k` untouched by any later block.
    pub fn backward_residual_support(&self, k: usize) -> Result<QubitMask> {
        let b = self.block(k)?;
        let after = self.blocks[k + 1..].iter().fold(0, |m, b| m | b.support);
        Ok(b.support & !after)
    }

    /// Blocks reached by the backward sweep from `observable`, in increasing order.
    pub fn causal_cone_blocks(&self, observable: QubitMask) -> Vec<usize> {
        let mut active = observable;
        let mut cone = Vec::new();
        for (k, b) in self.blocks.iter().enumerate().rev() {
            if b.support & active != 0 {
                active |= b.support;
                cone.push(k);
            }
        }
        cone.reverse();
        cone
    }

    /// Index of the last block acting on qubit `q`.
    pub fn last_block_on(&self, q: usize) -> Option<usize> {
        self.blocks.iter().rposition(|b| b.support >> q & 1 == 1)
    }

    pub fn to_spec(&self) -> CircuitSpec {
        CircuitSpec {
            qubits: self.qubits,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockSpec {
                    kind: b.kind,
                    gates: b
                        .gates
                        .iter()
                        .map(|g| {
                            let q = qubits_of(g.generator.support());
                            let letters: String =
                                q.iter().map(|&i| g.generator.letter(i).as_char()).collect();
                            let generator = format!(
                                "{letters}@[{}]",
                                q.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
                            );
                            match g.angle {
                                Angle::Param(i) => GateSpec { generator, param: Some(i), fixed_angle: None },
                                Angle::Fixed(a) => GateSpec { generator, param: None, fixed_angle: Some(a) },
                            }
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// JSON form of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub qubits: usize,
    pub blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    #[serde(default = "default_kind")]
    pub kind: BlockKind,
    pub gates: Vec<GateSpec>,
}

fn default_kind() -> BlockKind {
    BlockKind::Design2
}

/// `generator` is `"ZZ@[3,4]"` or a dense string of length `qubits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_angle: Option<f64>,
}

impl CircuitSpec {
    pub fn build(&self) -> Result<Circuit> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            let mut gates = Vec::with_capacity(b.gates.len());
            for (g, gs) in b.gates.iter().enumerate() {
                let generator = PauliString::parse(&gs.generator, Some(self.qubits))
                    .map_err(|e| Error::InvalidCircuit(format!("blocks[{k}].gates[{g}]: {e}")))?;
                let angle = match (gs.param, gs.fixed_angle) {
                    (Some(i), None) => Angle::Param(i),
                    (None, Some(a)) => Angle::Fixed(a),
                    _ => {
                        return Err(Error::InvalidCircuit(format!(
                            "blocks[{k}].gates[{g}]: exactly one of param / fixed_angle required"
                        )))
                    }
                };
                gates.push(Gate::new(generator, angle)?);
            }
            blocks.push(Block::new(gates, b.kind)?);
        }
        Circuit::new(self.qubits, blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::mask_of;

    fn zz_block(n: usize, a: usize, b: usize, p: usize) -> Block {
        let g = PauliString::parse(&format!("ZZ@[{a},{b}]"), Some(n)).unwrap();
        Block::new(vec![Gate::param(g, p).unwrap()], BlockKind::Design2).unwrap()
    }

    fn ladder(n: usize) -> Circuit {
        Circuit::new(n, (0..n - 1).map(|i| zz_block(n, i, i + 1, i)).collect()).unwrap()
    }

    #[test]
    fn depths() {
        let c = ladder(5);
        assert_eq!(c.local_depth(2).unwrap(), 2);
        assert_eq!(c.max_local_depth(), 2);
        assert_eq!(c.global_depth(), 4);
        let one = Circuit::new(3, vec![zz_block(3, 0, 1, 0)]).unwrap();
        assert_eq!(one.local_depth(0).unwrap(), 1);
        assert_eq!(one.local_depth(2).unwrap(), 0);
        assert!(one.local_depth(3).is_err());
        let layer = Circuit::new(4, vec![zz_block(4, 0, 1, 0), zz_block(4, 2, 3, 1)]).unwrap();
        assert_eq!(layer.global_depth(), 1);
        let empty = Circuit::new(2, vec![]).unwrap();
        assert_eq!(empty.global_depth(), 0);
        assert_eq!(empty.max_local_depth(), 0);
    }

    #[test]
    fn supports() {
        let c = ladder(4);
        assert_eq!(c.connecting_support(0, 1).unwrap(), mask_of(&[1]));
        assert_eq!(c.connecting_support(1, 0).unwrap(), mask_of(&[1]));
        assert_eq!(c.connecting_support(0, 2).unwrap(), 0);
        let blocked = Circuit::new(
            3,
            vec![zz_block(3, 0, 1, 0), zz_block(3, 1, 2, 1), zz_block(3, 0, 1, 2)],
        )
        .unwrap();
        assert_eq!(blocked.connecting_support(0, 2).unwrap(), mask_of(&[0]));
        assert_eq!(c.forward_residual_support(0).unwrap(), mask_of(&[0, 1]));
        assert_eq!(c.forward_residual_support(2).unwrap(), mask_of(&[3]));
        assert_eq!(c.backward_residual_support(2).unwrap(), mask_of(&[2, 3]));
    }

    #[test]
    fn cones() {
        let c = ladder(4);
        assert_eq!(c.causal_cone_blocks(mask_of(&[3])), vec![0, 1, 2]);
        let c = Circuit::new(5, vec![zz_block(5, 0, 1, 0), zz_block(5, 2, 3, 1)]).unwrap();
        assert!(c.causal_cone_blocks(mask_of(&[4])).is_empty());
        assert_eq!(c.causal_cone_blocks(mask_of(&[2, 3])), vec![1]);
    }

    #[test]
    fn param_indices_must_be_dense() {
        let n = 3;
        assert!(Circuit::new(n, vec![zz_block(n, 0, 1, 1)]).is_err());
        assert!(Circuit::new(n, vec![zz_block(n, 0, 1, 0), zz_block(n, 1, 2, 0)]).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let c = ladder(4);
        assert_eq!(c.to_spec().build().unwrap(), c);
    }
}
