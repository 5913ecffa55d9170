//! Exact search: first-fail branch and prune with an optional constraint set,
//! and a brute-force oracle for small instances.

mod brute;
pub(crate) mod engine;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force, brute_force_optima, BRUTE_FORCE_LIMIT};

use crate::clock::{Clock, ClockMode};
use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::eval::{objective_of, Deployment};
use crate::heuristics::greedy;
use crate::model::Model;
use crate::stats::SearchStats;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_nodes: Option<u64>,
    pub max_seconds: Option<f64>,
    #[serde(default)]
    pub clock: ClockMode,
}

impl SearchLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(max: u64) -> Self {
        Self { max_nodes: Some(max), ..Self::default() }
    }

    pub fn seconds(max: f64) -> Self {
        Self { max_seconds: Some(max), ..Self::default() }
    }

    fn check(&self) -> Result<()> {
        if self.max_nodes == Some(0) {
            return Err(Error::InvalidParams("max_nodes must be positive".into()));
        }
        if self.max_seconds.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::InvalidParams("max_seconds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Best order found; `None` when the limits ran out before any.
    #[serde(rename = "order")]
    pub best: Option<Deployment>,
    pub objective: Option<f64>,
    /// The search space was exhausted: `best` is optimal under the constraints.
    pub proven: bool,
    pub stats: SearchStats,
}

/// Minimizes the objective over orders satisfying `cs`.
///
/// The greedy order, repaired to the constraints, seeds the incumbent.
pub fn solve_exact(model: &Model, cs: &ConstraintSet, limits: SearchLimits) -> Result<SearchOutcome> {
    limits.check()?;
    let n = model.num_indexes();
    if cs.len() != n {
        return Err(Error::InvalidParams(format!(
            "constraints cover {} indexes, instance has {n}",
            cs.len()
        )));
    }
    if !cs.is_acyclic() {
        return Err(Error::CyclicConstraints);
    }
    let mut clock = Clock::new(limits.clock);
    let seed = cs
        .repair(&greedy(model).indices())
        .filter(|o| cs.check(o).is_ok())
        .map(|o| {
            let obj = objective_of(model, &o);
            (o, obj)
        });
    let result = engine::run(
        model,
        cs,
        &vec![None; n],
        None,
        seed.as_ref().map(|s| s.1),
        engine::EngineLimits {
            max_nodes: limits.max_nodes,
            max_failures: None,
            deadline: limits.max_seconds,
        },
        &mut clock,
    );
    let mut stats = result.stats;
    if let Some((_, obj)) = &seed {
        stats.incumbent_timeline.insert(0, (0.0, *obj));
    }
    let best = result.improved.or(seed);
    Ok(SearchOutcome {
        objective: best.as_ref().map(|b| b.1),
        best: best.map(|b| Deployment::from_indices(b.0)),
        proven: result.exhausted,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    fn solve(inst: &crate::instance::Instance) -> SearchOutcome {
        let m = Model::new(inst).unwrap();
        solve_exact(&m, &ConstraintSet::from_model(&m), SearchLimits::unlimited()).unwrap()
    }

    #[test]
    fn compete_optimum() {
        let out = solve(&fixtures::compete());
        assert!(out.proven);
        assert_eq!(out.best.unwrap().indices(), vec![1, 0]);
        assert!((out.objective.unwrap() - 3800.0).abs() < 1e-9);
    }

    #[test]
    fn build_fixture_optimum() {
        let out = solve(&fixtures::build_interaction());
        assert!((out.objective.unwrap() - 3320.0).abs() < 1e-9);
    }

    #[test]
    fn dominated_fixture_optimum() {
        let out = solve(&fixtures::dominated());
        assert_eq!(out.best.unwrap().indices(), vec![1, 0, 2]);
    }

    #[test]
    fn rejects_zero_limits() {
        let m = Model::new(&fixtures::compete()).unwrap();
        let cs = ConstraintSet::from_model(&m);
        assert!(solve_exact(&m, &cs, SearchLimits::nodes(0)).is_err());
    }

    #[test]
    fn node_limit_is_not_a_proof() {
        let inst = crate::gen::generate(&crate::gen::GenProfile::custom(9, 6, 3), 3).unwrap();
        let m = Model::new(&inst).unwrap();
        let out = solve_exact(&m, &ConstraintSet::from_model(&m), SearchLimits::nodes(3)).unwrap();
        assert!(!out.proven);
        assert!(out.best.is_some(), "greedy incumbent survives");
    }
}
