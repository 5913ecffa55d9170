//! Improvement searches that start from a complete order.

mod lns;
mod tabu;

use serde::{Deserialize, Serialize};

pub use lns::{adapt, lns, vns, LnsParams, VnsParams, VnsStep};
pub use tabu::{tabu_bswap, tabu_fswap, TabuParams};

use crate::constraints::ConstraintSet;
use crate::error::Result;
use crate::eval::Deployment;
use crate::model::Model;
use crate::stats::SearchStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalOutcome {
    pub best: Deployment,
    pub objective: f64,
    pub stats: SearchStats,
    /// Moves applied (tabu) or relaxations run (LNS, VNS).
    pub iterations: u64,
    /// Relaxations whose subtree was fully explored.
    pub proofs: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<VnsStep>,
}

/// `elapsed_seconds,objective` rows.
pub fn timeline_csv(timeline: &[(f64, f64)]) -> String {
    let mut out = String::from("elapsed_seconds,objective\n");
    for (t, obj) in timeline {
        out.push_str(&format!("{t},{obj}\n"));
    }
    out
}

/// Runs first-swap tabu search and VNS side by side on their own threads and
/// keeps the better result (tabu wins ties).
pub fn portfolio(
    model: &Model,
    cs: &ConstraintSet,
    start: &Deployment,
    tabu: &TabuParams,
    vns_params: &VnsParams,
) -> Result<LocalOutcome> {
    let (a, b) = std::thread::scope(|s| {
        let t = s.spawn(|| tabu_fswap(model, start, tabu));
        let v = s.spawn(|| vns(model, cs, start, vns_params));
        (t.join().expect("tabu thread"), v.join().expect("vns thread"))
    });
    let (a, b) = (a?, b?);
    Ok(if b.objective < a.objective { b } else { a })
}
