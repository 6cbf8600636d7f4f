//! Ground-energy cache keyed by a hash of the Hamiltonian's canonical text.

use std::path::PathBuf;

use bpscope_core::models::{ground_energy, Hamiltonian};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::RunResult;

#[derive(Serialize, Deserialize)]
struct Entry {
    hamiltonian: String,
    energy: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EdCache {
    dir: Option<PathBuf>,
}

pub fn key(h: &Hamiltonian) -> String {
    hex::encode(Sha256::digest(h.canonical_text().as_bytes()))
}

impl EdCache {
    /// `None` disables persistence.
    pub fn new(dir: Option<PathBuf>) -> Self {
        EdCache { dir }
    }

    pub fn ground_energy(&self, h: &Hamiltonian) -> RunResult<f64> {
        let text = h.canonical_text();
        let path = self.dir.as_ref().map(|d| d.join(format!("{}.json", key(h))));
        if let Some(p) = &path {
            if let Ok(raw) = std::fs::read_to_string(p) {
                if let Ok(e) = serde_json::from_str::<Entry>(&raw) {
                    if e.hamiltonian == text {
                        return Ok(e.energy);
                    }
                }
            }
        }
        let energy = ground_energy(h)?;
        if let (Some(p), Some(d)) = (&path, &self.dir) {
            std::fs::create_dir_all(d)?;
            std::fs::write(p, serde_json::to_string(&Entry { hamiltonian: text, energy })?)?;
        }
        Ok(energy)
    }
}
