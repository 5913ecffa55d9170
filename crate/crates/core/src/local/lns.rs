use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, ClockMode};
use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::eval::{objective_of, Deployment};
use crate::local::LocalOutcome;
use crate::model::Model;
use crate::search::engine::{self, EngineLimits};
use crate::stats::SearchStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LnsParams {
    /// Share of the indexes freed per relaxation (at least two are).
    pub relax_fraction: f64,
    /// Failed or pruned nodes allowed per relaxation.
    pub failure_limit: u64,
    /// Seconds.
    pub deadline: Option<f64>,
    pub max_relaxations: Option<u64>,
    pub seed: u64,
    #[serde(default)]
    pub clock: ClockMode,
}

impl Default for LnsParams {
    fn default() -> Self {
        Self {
            relax_fraction: 0.05,
            failure_limit: 500,
            deadline: Some(10.0),
            max_relaxations: None,
            seed: 0,
            clock: ClockMode::Wall,
        }
    }
}

impl LnsParams {
    fn check(&self) -> Result<()> {
        if !(self.relax_fraction > 0.0 && self.relax_fraction <= 1.0) {
            return Err(Error::InvalidParams("relax_fraction must be in (0, 1]".into()));
        }
        if self.failure_limit == 0 {
            return Err(Error::InvalidParams("failure_limit must be positive".into()));
        }
        if self.deadline.is_some_and(|d| d < 0.0) {
            return Err(Error::InvalidParams("deadline must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnsParams {
    pub lns: LnsParams,
    pub batch_size: u64,
    pub proof_threshold: f64,
    pub relax_increment: f64,
    pub fail_limit_growth: f64,
}

impl Default for VnsParams {
    fn default() -> Self {
        Self {
            lns: LnsParams::default(),
            batch_size: 20,
            proof_threshold: 0.75,
            relax_increment: 0.01,
            fail_limit_growth: 0.20,
        }
    }
}

/// Neighborhood parameters after one batch of VNS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VnsStep {
    pub batch: u64,
    pub proofs: u64,
    pub relax_fraction: f64,
    pub failure_limit: u64,
    pub elapsed: f64,
}

/// Adapts the neighborhood after a batch: mostly proofs means the
/// neighborhood is too easy and grows, otherwise the search gets a larger
/// failure limit. Returns `(relax_fraction, failure_limit)`.
pub fn adapt(relax_fraction: f64, failure_limit: u64, proofs: u64, batch: u64, params: &VnsParams) -> (f64, u64) {
    if batch > 0 && proofs as f64 / batch as f64 > params.proof_threshold {
        ((relax_fraction + params.relax_increment).min(1.0), failure_limit)
    } else {
        let grown = (failure_limit as f64 * (1.0 + params.fail_limit_growth)).round() as u64;
        (relax_fraction, grown.max(failure_limit + 1))
    }
}

/// Large neighborhood search: frees a random subset of indexes, lets them
/// permute among the positions they held, and searches that subproblem
/// under `cs` up to the failure limit. Improvements are adopted. A completed
/// relaxation that frees every index proves optimality and ends the run.
pub fn lns(model: &Model, cs: &ConstraintSet, start: &Deployment, params: &LnsParams) -> Result<LocalOutcome> {
    let vns = VnsParams { lns: params.clone(), ..VnsParams::default() };
    run(model, cs, start, &vns, false)
}

/// LNS whose neighborhood size and failure limit adapt after every batch.
pub fn vns(model: &Model, cs: &ConstraintSet, start: &Deployment, params: &VnsParams) -> Result<LocalOutcome> {
    if !(params.proof_threshold > 0.0 && params.proof_threshold < 1.0) {
        return Err(Error::InvalidParams("proof_threshold must be in (0, 1)".into()));
    }
    if params.batch_size == 0 {
        return Err(Error::InvalidParams("batch_size must be positive".into()));
    }
    run(model, cs, start, params, true)
}

fn run(model: &Model, cs: &ConstraintSet, start: &Deployment, params: &VnsParams, adaptive: bool) -> Result<LocalOutcome> {
    params.lns.check()?;
    let n = model.num_indexes();
    start.check_permutation(n)?;
    let mut order = start.indices();
    if !model.respects_precedences(&start.order) {
        return Err(Error::InfeasibleStart("start violates a hard precedence".into()));
    }
    cs.check(&order).map_err(Error::InfeasibleStart)?;
    let mut clock = Clock::new(params.lns.clock);
    let mut rng = ChaCha8Rng::seed_from_u64(params.lns.seed);
    let mut obj = objective_of(model, &order);
    let mut stats = SearchStats::default();
    stats.record(0.0, obj);
    let mut fraction = params.lns.relax_fraction;
    let mut limit = params.lns.failure_limit;
    let mut relaxations = 0u64;
    let mut proofs = 0u64;
    let mut batch_proofs = 0u64;
    let mut batch_len = 0u64;
    let mut trajectory = Vec::new();

    while n >= 2
        && !clock.expired(params.lns.deadline)
        && params.lns.max_relaxations.is_none_or(|m| relaxations < m)
    {
        let k = ((fraction * n as f64).ceil() as usize).clamp(2, n);
        let freed = rand::seq::index::sample(&mut rng, n, k);
        let mut pinned = vec![None; n];
        let mut rank = vec![0; n];
        for (p, &i) in order.iter().enumerate() {
            pinned[i] = Some(p);
            rank[i] = p;
        }
        for p in freed.iter() {
            pinned[order[p]] = None;
        }
        clock.tick(n as u64);
        let result = engine::run(
            model,
            cs,
            &pinned,
            Some(&rank),
            Some(obj),
            EngineLimits { max_nodes: None, max_failures: Some(limit), deadline: None },
            &mut clock,
        );
        stats.nodes += result.stats.nodes;
        stats.failures += result.stats.failures;
        stats.pruned_by_bound += result.stats.pruned_by_bound;
        stats.pruned_by_propagation += result.stats.pruned_by_propagation;
        relaxations += 1;
        if result.exhausted {
            proofs += 1;
            batch_proofs += 1;
        }
        if let Some((better, value)) = result.improved {
            order = better;
            obj = value;
            stats.record(clock.elapsed(), obj);
        }
        if result.exhausted && k == n {
            // Every index was free: the order is optimal under `cs`.
            break;
        }
        batch_len += 1;
        if adaptive && batch_len == params.batch_size {
            (fraction, limit) = adapt(fraction, limit, batch_proofs, batch_len, params);
            trajectory.push(VnsStep {
                batch: relaxations / params.batch_size,
                proofs: batch_proofs,
                relax_fraction: fraction,
                failure_limit: limit,
                elapsed: clock.elapsed(),
            });
            batch_len = 0;
            batch_proofs = 0;
        }
    }
    stats.elapsed_seconds = clock.elapsed();
    Ok(LocalOutcome {
        best: Deployment::from_indices(order),
        objective: obj,
        stats,
        iterations: relaxations,
        proofs,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    #[test]
    fn adaptation_arithmetic() {
        let p = VnsParams::default();
        let (f, l) = adapt(0.05, 500, 16, 20, &p);
        assert!((f - 0.06).abs() < 1e-12);
        assert_eq!(l, 500);
        assert_eq!(adapt(0.05, 500, 10, 20, &p), (0.05, 600));
        // Exactly at the threshold is not "more than".
        assert_eq!(adapt(0.05, 500, 15, 20, &p), (0.05, 600));
    }

    #[test]
    fn build_fixture_in_one_relaxation() {
        let m = Model::new(&fixtures::build_interaction()).unwrap();
        let cs = ConstraintSet::from_model(&m);
        let params = LnsParams { max_relaxations: Some(1), ..LnsParams::default() };
        let out = lns(&m, &cs, &Deployment::from_indices([0, 1]), &params).unwrap();
        assert!((out.objective - 3320.0).abs() < 1e-9);
        assert_eq!(out.proofs, 1);
    }

    #[test]
    fn zero_deadline_returns_start() {
        let m = Model::new(&fixtures::compete()).unwrap();
        let cs = ConstraintSet::from_model(&m);
        let params = LnsParams { deadline: Some(0.0), ..LnsParams::default() };
        let out = lns(&m, &cs, &Deployment::from_indices([0, 1]), &params).unwrap();
        assert_eq!(out.best.indices(), vec![0, 1]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn rejects_bad_params() {
        let m = Model::new(&fixtures::compete()).unwrap();
        let cs = ConstraintSet::from_model(&m);
        let start = Deployment::from_indices([0, 1]);
        let p = LnsParams { relax_fraction: 0.0, ..LnsParams::default() };
        assert!(lns(&m, &cs, &start, &p).is_err());
        let p = VnsParams { proof_threshold: 1.0, ..VnsParams::default() };
        assert!(vns(&m, &cs, &start, &p).is_err());
    }
}
