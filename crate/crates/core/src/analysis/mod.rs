//! Structural analysis: derives ordering constraints that keep at least one
//! optimal deployment while cutting the search space.
//!
//! Five detectors run in turn (alliances, colonized indexes, dominated
//! indexes, density order of disjoint indexes, tail champions) and the
//! whole sequence repeats until a pass adds nothing. When the last position
//! becomes fixed, that index is dropped together with its plans and the
//! analysis continues on the smaller problem.

mod alliance;
mod colony;
mod disjoint;
mod dominance;
mod tail;

use serde::{Deserialize, Serialize};

pub use alliance::detect_alliances;
pub use colony::detect_colonized;
pub use disjoint::detect_disjoint_order;
pub use dominance::detect_dominated;
pub use tail::{tail_analysis, TailFindings};

use crate::clock::{Clock, ClockMode};
use crate::constraints::{ConstraintData, ConstraintSet};
use crate::error::{Error, Result};
use crate::instance::IndexId;
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detectors {
    pub alliances: bool,
    pub colonized: bool,
    pub dominated: bool,
    pub disjoint: bool,
    pub tail: bool,
}

impl Default for Detectors {
    fn default() -> Self {
        Self { alliances: true, colonized: true, dominated: true, disjoint: true, tail: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Seconds; the constraints found so far are returned once exceeded.
    pub time_budget: Option<f64>,
    /// Largest number of tail patterns enumerated at one tail length.
    pub tail_budget: usize,
    pub detectors: Detectors,
    pub clock: ClockMode,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            time_budget: Some(60.0),
            tail_budget: 50_000,
            detectors: Detectors::default(),
            clock: ClockMode::Wall,
        }
    }
}

/// What the analysis found. Serializes to the constraint sidecar file read
/// by `solve --constraints`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub alliances: Vec<Vec<IndexId>>,
    /// `(colonized, colonizer)`.
    pub colonized: Vec<(IndexId, IndexId)>,
    /// `(dominated, dominator)`.
    pub dominated: Vec<(IndexId, IndexId)>,
    /// `(earlier, later)`.
    pub disjoint_order: Vec<(IndexId, IndexId)>,
    /// `(index, position from the end)`, 0 meaning built last.
    pub tail_fixes: Vec<(IndexId, usize)>,
    pub iterations: usize,
    pub elapsed: f64,
    #[serde(default)]
    pub timed_out: bool,
    #[serde(flatten)]
    pub constraints: ConstraintData,
}

impl AnalysisReport {
    pub fn constraint_set(&self, num_indexes: usize) -> Result<ConstraintSet> {
        ConstraintSet::from_data(num_indexes, &self.constraints)
    }

    pub fn from_json_str(text: &str) -> Result<AnalysisReport> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the detectors to a fixpoint, seeded with the hard precedences.
pub fn analyze(model: &Model, opts: &AnalysisOptions) -> Result<(ConstraintSet, AnalysisReport)> {
    let mut clock = Clock::new(opts.clock);
    let n = model.num_indexes();
    let mut cs = ConstraintSet::from_model(model);
    if !cs.is_acyclic() {
        return Err(Error::CyclicConstraints);
    }
    let mut report = AnalysisReport::default();
    let mut active: Vec<usize> = (0..n).collect();
    let mut productive = 0;
    let det = opts.detectors;
    let ids = |pairs: &[(usize, usize)], active: &[usize]| -> Vec<(usize, usize)> {
        pairs.iter().map(|&(a, b)| (active[a], active[b])).collect()
    };

    'passes: loop {
        let mut changed = false;
        for step in 0..5 {
            if clock.expired(opts.time_budget) {
                report.timed_out = true;
                break 'passes;
            }
            if active.is_empty() {
                break;
            }
            let sub = model.restrict(&active);
            let sub_cs = cs.restrict(&active);
            match step {
                0 if det.alliances => {
                    for group in detect_alliances(&sub, &sub_cs) {
                        let members: Vec<usize> = group.iter().map(|&k| active[k]).collect();
                        if cs.add_block(&members) {
                            report.alliances.push(members.iter().map(|&m| m.into()).collect());
                            changed = true;
                        }
                    }
                }
                1 if det.colonized => {
                    for (u, j) in ids(&detect_colonized(&sub, &sub_cs), &active) {
                        if cs.add_precedence(j, u) {
                            report.colonized.push((u.into(), j.into()));
                            changed = true;
                        }
                    }
                }
                2 if det.dominated => {
                    for (i, k) in ids(&detect_dominated(&sub, &sub_cs), &active) {
                        if cs.add_precedence(k, i) {
                            report.dominated.push((i.into(), k.into()));
                            changed = true;
                        }
                    }
                }
                3 if det.disjoint => {
                    for (f, s) in ids(&detect_disjoint_order(&sub, &sub_cs), &active) {
                        if cs.add_precedence(f, s) {
                            report.disjoint_order.push((f.into(), s.into()));
                            changed = true;
                        }
                    }
                }
                4 if det.tail => {
                    let found = tail::tail_analysis_until(
                        &sub,
                        &sub_cs,
                        opts.tail_budget,
                        &mut clock,
                        opts.time_budget,
                    );
                    for (a, b) in ids(&found.precedences, &active) {
                        changed |= cs.add_precedence(a, b);
                    }
                    for (x, lo, hi) in found.domains {
                        changed |= cs.restrict_domain(active[x], lo, hi);
                    }
                }
                _ => continue,
            }
            if !cs.is_acyclic() || !cs.tighten_domains() {
                return Err(Error::CyclicConstraints);
            }
            // Peel off indexes pinned to the last open position.
            while let Some(k) = active
                .iter()
                .position(|&i| cs.fixed_position(i) == Some(active.len() - 1))
            {
                let i = active.remove(k);
                report.tail_fixes.push((i.into(), n - 1 - active.len()));
                changed = true;
            }
        }
        if changed {
            productive += 1;
        } else {
            break;
        }
    }
    report.iterations = productive.max(1);
    report.elapsed = clock.elapsed();
    report.constraints = cs.to_data();
    log::debug!(
        "analysis: {} precedences, {} blocks, {} iterations",
        cs.num_precedences(),
        cs.blocks().len(),
        report.iterations
    );
    Ok((cs, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    #[test]
    fn alliance_fixture_single_iteration() {
        let m = Model::new(&fixtures::alliance()).unwrap();
        let (cs, report) = analyze(&m, &AnalysisOptions::default()).unwrap();
        assert_eq!(cs.blocks(), &[vec![0, 1]]);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn dominated_fixture_domains() {
        let m = Model::new(&fixtures::dominated()).unwrap();
        let (cs, report) = analyze(&m, &AnalysisOptions::default()).unwrap();
        assert!(cs.precedes(1, 0));
        assert!(cs.domain(0).0 >= 1);
        assert!(report.dominated.contains(&(0.into(), 1.into())));
    }

    #[test]
    fn sidecar_round_trip() {
        let m = Model::new(&fixtures::dominated()).unwrap();
        let (cs, report) = analyze(&m, &AnalysisOptions::default()).unwrap();
        let text = report.to_json_string();
        for key in [
            "alliances",
            "colonized",
            "dominated",
            "disjoint_order",
            "tail_fixes",
            "precedence_pairs",
            "iterations",
        ] {
            assert!(text.contains(&format!("\"{key}\"")), "missing {key}");
        }
        let back = AnalysisReport::from_json_str(&text).unwrap();
        assert_eq!(back.constraint_set(3).unwrap(), cs);
    }
}
