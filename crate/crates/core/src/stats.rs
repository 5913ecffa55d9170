//! Counters reported by the searches.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned_by_bound: u64,
    pub pruned_by_propagation: u64,
    /// Nodes that failed propagation, were cut by the bound, or were complete
    /// orders no better than the incumbent.
    pub failures: u64,
    /// `(seconds, objective)` each time the incumbent improved.
    pub incumbent_timeline: Vec<(f64, f64)>,
    /// Number of distinct optimal orders, when enumerated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum_count: Option<u64>,
    pub elapsed_seconds: f64,
}

impl SearchStats {
    pub(crate) fn record(&mut self, seconds: f64, objective: f64) {
        self.incumbent_timeline.push((seconds, objective));
    }
}
