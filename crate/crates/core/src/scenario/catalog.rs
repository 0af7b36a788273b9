//! Scenarios shipped with the crate.

use super::config::{Batch, Scenario};
use crate::error::Result;

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../scenarios/", $name, ".json")))),*]
    };
}

/// `(file stem, batch JSON)` of every bundled scenario file.
pub const BUILTIN: &[(&str, &str)] = builtin![
    "young-audit-zygmund",
    "wolff-dirac-p3",
    "wolff-dirac-p2",
    "rearrangement-random-grid",
    "dirac-p3-disk",
    "pointwise-dirac-zygmund",
    "pointwise-uniform-p3-weighted",
    "pointwise-uniform-zygmund",
    "pointwise-morrey-p3",
    "pointwise-morrey-zygmund-weighted",
    "marcinkiewicz-p3-disk",
    "excess-decay-harmonic",
    "campanato-dirac-p3",
    "vmo-dirac-zygmund",
    "sola-dirac-p3",
    "comparison-uniform-p3",
];

/// Seed of every bundled file.
pub const BUILTIN_SEED: u64 = 1;

/// Ids of the scenarios whose fitted pointwise constants form one family.
pub const POINTWISE_FAMILY: &[&str] = &[
    "dirac-p3-disk",
    "pointwise-dirac-zygmund",
    "pointwise-uniform-p3-weighted",
    "pointwise-uniform-zygmund",
    "pointwise-morrey-p3",
    "pointwise-morrey-zygmund-weighted",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
}

fn scenarios() -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    for (_, text) in BUILTIN {
        out.extend(Batch::from_json(text)?.scenarios);
    }
    Ok(out)
}

/// Stable ids with one-line descriptions, in catalog order.
pub fn list_builtin_scenarios() -> Vec<CatalogEntry> {
    scenarios()
        .expect("bundled scenarios are valid")
        .into_iter()
        .map(|s| CatalogEntry {
            id: s.id,
            description: s.description,
        })
        .collect()
}

/// All bundled scenarios as one batch.
pub fn builtin_batch(seed: u64) -> Batch {
    let batch = Batch {
        seed,
        scenarios: scenarios().expect("bundled scenarios are valid"),
    };
    batch.validate().expect("bundled ids are unique");
    batch
}

/// The bundled file for `name`, if any.
pub fn builtin_config(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
