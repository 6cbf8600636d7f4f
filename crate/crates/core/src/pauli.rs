//! Pauli-string algebra on up to 64 qubits.
//!
//! Letters are packed into two bit planes (`x`, `z`), two bits per qubit:
//! `I = (0,0)`, `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`. The global phase is an
//! exponent `e` of `i`, so the operator is `i^e * P_0 ⊗ P_1 ⊗ ...`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bitmask over qubit indices. Bit `q` set means qubit `q` is in the set.
pub type QubitMask = u64;

/// Largest qubit count representable by [`QubitMask`].
pub const MAX_QUBITS: usize = 64;

/// Builds a mask from a list of qubit indices.
pub fn mask_of(qubits: &[usize]) -> QubitMask {
    qubits.iter().fold(0, |m, &q| m | (1u64 << q))
}

/// Lists the qubits of a mask in increasing order.
pub fn qubits_of(mask: QubitMask) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let q = m.trailing_zeros() as usize;
        out.push(q);
        m &= m - 1;
    }
    out
}

/// Mask with the lowest `n` bits set.
pub fn full_mask(n: usize) -> QubitMask {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Z => (false, true),
            Letter::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (false, true) => Letter::Z,
            (true, true) => Letter::Y,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// An `n`-qubit Pauli operator with a phase in `{+1, +i, -1, -i}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Dimension(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit limit")));
        }
        Ok(PauliString { n, x: 0, z: 0, phase: 0 })
    }

    /// Builds a string from per-qubit letters with phase `+1`.
    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let mut p = Self::identity(letters.len())?;
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }

    /// Places `letters[i]` on qubit `qubits[i]` of an `n`-qubit identity.
    pub fn on_qubits(n: usize, letters: &[Letter], qubits: &[usize]) -> Result<Self> {
        if letters.len() != qubits.len() {
            return Err(Error::Dimension(format!(
                "{} letters for {} target qubits",
                letters.len(),
                qubits.len()
            )));
        }
        let mut p = Self::identity(n)?;
        let mut seen = 0u64;
        for (&l, &q) in letters.iter().zip(qubits) {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, qubits: n });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::Dimension(format!("qubit {q} targeted twice")));
            }
            seen |= 1 << q;
            p.set(q, l);
        }
        Ok(p)
    }

    /// Single-letter string on qubit `q`.
    pub fn single(n: usize, q: usize, l: Letter) -> Result<Self> {
        Self::on_qubits(n, &[l], &[q])
    }

    /// Raw constructor from bit planes and phase exponent.
    pub fn from_bits(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        let mask = full_mask(n);
        if n > MAX_QUBITS || x & !mask != 0 || z & !mask != 0 {
            return Err(Error::Dimension(format!("bit planes exceed {n} qubits")));
        }
        Ok(PauliString { n, x, z, phase: phase & 3 })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Phase as an exponent of `i`, in `0..4`.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, exponent: u8) -> Self {
        self.phase = exponent & 3;
        self
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    fn set(&mut self, q: usize, l: Letter) {
        let (x, z) = l.bits();
        self.x = (self.x & !(1 << q)) | ((x as u64) << q);
        self.z = (self.z & !(1 << q)) | ((z as u64) << q);
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x | self.z == 0
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> QubitMask {
        self.x | self.z
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "Pauli lengths differ: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Operator product `self * other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // Each letter is i^{xz} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{z1 x2}.
        let e = self.phase as u32
            + other.phase as u32
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        Ok(PauliString { n: self.n, x, z, phase: (e % 4) as u8 })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(anti % 2 == 0)
    }

    /// Sub-string on the qubits of `s` in increasing order, phase reset to `+1`.
    pub fn restrict(&self, s: &[usize]) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for &q in s {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { qubit: q, qubits: self.n });
            }
            letters.push(self.letter(q));
        }
        Self::from_letters(&letters)
    }

    /// Parses either the dense form `"ZIXY"` or the sparse form `"ZZ@[3,4]"`
    /// (the latter needs `n`). Both accept a leading phase `+`, `-`, `+i`, `-i`, `i`.
    pub fn parse(text: &str, n: Option<usize>) -> Result<Self> {
        let text = text.trim();
        let (phase, body) = split_phase(text);
        let p = if let Some((letters, targets)) = body.split_once('@') {
            let n = n.ok_or_else(|| Error::Parse(format!("'{text}' needs a qubit count")))?;
            let letters = parse_letters(letters)?;
            let targets = targets
                .trim()
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("bad target list in '{text}'")))?;
            let qubits = targets
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("bad qubit index in '{text}': {e}")))?;
            Self::on_qubits(n, &letters, &qubits)?
        } else {
            let p = Self::from_letters(&parse_letters(body)?)?;
            if let Some(n) = n {
                if p.n != n {
                    return Err(Error::Dimension(format!(
                        "'{text}' has {} letters, expected {n}",
                        p.n
                    )));
                }
            }
            p
        };
        Ok(p.with_phase(phase))
    }
}

fn split_phase(text: &str) -> (u8, &str) {
    for (prefix, e) in [("+i", 1u8), ("-i", 3), ("+1", 0), ("-1", 2), ("i", 1), ("+", 0), ("-", 2)] {
        if let Some(rest) = text.strip_prefix(prefix) {
            return (e, rest);
        }
    }
    (0, text)
}

fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.trim()
        .chars()
        .map(|c| Letter::from_char(c).ok_or_else(|| Error::Parse(format!("unknown Pauli letter '{c}'"))))
        .collect()
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, None)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
