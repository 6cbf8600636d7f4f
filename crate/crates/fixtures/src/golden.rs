//! Reference numbers with a note on how each was obtained.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct GoldenValue {
    pub name: String,
    pub value: f64,
    pub source: String,
}

#[derive(Deserialize)]
struct GoldenFile {
    values: Vec<GoldenValue>,
}

pub fn all() -> Vec<GoldenValue> {
    let file: GoldenFile = serde_json::from_str(include_str!("../data/golden.json")).expect("golden data parses");
    file.values
}

/// Panics on unknown names.
pub fn value(name: &str) -> f64 {
    all().into_iter().find(|g| g.name == name).unwrap_or_else(|| panic!("no golden value {name}")).value
}
