use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, ClockMode};
use crate::error::{Error, Result};
use crate::eval::{objective_of, swapped_segment_delta, Deployment, PrefixState};
use crate::local::LocalOutcome;
use crate::model::Model;
use crate::stats::SearchStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabuParams {
    /// Iterations a swapped index stays tabu; `None` means `7 + n / 10`.
    pub tabu_length: Option<usize>,
    /// Seconds.
    pub deadline: Option<f64>,
    pub max_iterations: Option<u64>,
    pub seed: u64,
    #[serde(default)]
    pub clock: ClockMode,
}

impl Default for TabuParams {
    fn default() -> Self {
        Self { tabu_length: None, deadline: Some(10.0), max_iterations: None, seed: 0, clock: ClockMode::Wall }
    }
}

/// Best-swap tabu search: each iteration applies the best admissible swap,
/// even a worsening one. A tabu swap is admissible only when it would beat
/// the best order seen so far.
pub fn tabu_bswap(model: &Model, start: &Deployment, params: &TabuParams) -> Result<LocalOutcome> {
    run(model, start, params, Mode::Best)
}

/// First-swap tabu search: scans pairs in a fresh seeded random order each
/// iteration and applies the first improving admissible swap. Stops at a
/// local optimum.
pub fn tabu_fswap(model: &Model, start: &Deployment, params: &TabuParams) -> Result<LocalOutcome> {
    run(model, start, params, Mode::First)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Best,
    First,
}

fn run(model: &Model, start: &Deployment, params: &TabuParams, mode: Mode) -> Result<LocalOutcome> {
    let n = model.num_indexes();
    start.check_permutation(n)?;
    if !model.respects_precedences(&start.order) {
        return Err(Error::InfeasibleStart("start violates a hard precedence".into()));
    }
    if params.deadline.is_some_and(|d| d < 0.0) {
        return Err(Error::InvalidParams("deadline must be non-negative".into()));
    }
    let tenure = params.tabu_length.unwrap_or(7 + n / 10) as u64;
    let mut clock = Clock::new(params.clock);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order = start.indices();
    let mut pos = start.positions();
    let mut obj = objective_of(model, &order);
    let mut best = (order.clone(), obj);
    let mut stats = SearchStats::default();
    stats.record(0.0, obj);
    let mut tabu_until = vec![0u64; n];
    let mut iter = 0u64;
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();

    while !clock.expired(params.deadline) && params.max_iterations.is_none_or(|m| iter < m) {
        iter += 1;
        let tol = 1e-9 * best.1.abs().max(1.0);
        let mut chosen: Option<(usize, usize, f64)> = None;
        let admissible = |a: usize, b: usize, delta: f64, iter: u64| {
            let tabu = tabu_until[order[a]] >= iter || tabu_until[order[b]] >= iter;
            !tabu || obj + delta < best.1 - tol
        };
        match mode {
            Mode::Best => {
                let mut state = PrefixState::new(model);
                for a in 0..n {
                    for b in a + 1..n {
                        if !swap_feasible(model, &order, &pos, a, b) {
                            continue;
                        }
                        let delta = swapped_segment_delta(model, &mut state, &order, a, b);
                        clock.tick((b - a + 1) as u64);
                        if admissible(a, b, delta, iter) && chosen.is_none_or(|c| delta < c.2) {
                            chosen = Some((a, b, delta));
                        }
                    }
                    state.push(model, order[a]);
                }
            }
            Mode::First => {
                pairs.shuffle(&mut rng);
                for &(a, b) in &pairs {
                    if !swap_feasible(model, &order, &pos, a, b) {
                        continue;
                    }
                    let mut state = PrefixState::from_prefix(model, &order[..a]);
                    let delta = swapped_segment_delta(model, &mut state, &order, a, b);
                    clock.tick((b + 1) as u64);
                    if delta < -tol && admissible(a, b, delta, iter) {
                        chosen = Some((a, b, delta));
                        break;
                    }
                }
            }
        }
        let Some((a, b, delta)) = chosen else { break };
        order.swap(a, b);
        pos[order[a]] = a;
        pos[order[b]] = b;
        tabu_until[order[a]] = iter + tenure;
        tabu_until[order[b]] = iter + tenure;
        obj += delta;
        if obj < best.1 - tol {
            // Re-anchor on the exact value so rounding cannot drift.
            obj = objective_of(model, &order);
            best = (order.clone(), obj);
            stats.record(clock.elapsed(), obj);
        }
    }
    stats.elapsed_seconds = clock.elapsed();
    Ok(LocalOutcome {
        best: Deployment::from_indices(best.0),
        objective: best.1,
        stats,
        iterations: iter,
        proofs: 0,
        trajectory: Vec::new(),
    })
}

/// Swapping positions `a < b` keeps the hard precedences when the index
/// moving forward has all predecessors before `a` and the index moving back
/// has all successors after `b`.
pub(crate) fn swap_feasible(model: &Model, order: &[usize], pos: &[usize], a: usize, b: usize) -> bool {
    let (x, y) = (order[a], order[b]);
    model.preds(y).iter().all(|&p| pos[p] < a) && model.succs(x).iter().all(|&s| pos[s] > b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    fn params() -> TabuParams {
        TabuParams { deadline: Some(1.0), max_iterations: Some(50), ..TabuParams::default() }
    }

    #[test]
    fn bswap_fixes_compete() {
        let m = Model::new(&fixtures::compete()).unwrap();
        let out = tabu_bswap(&m, &Deployment::from_indices([0, 1]), &params()).unwrap();
        assert_eq!(out.best.indices(), vec![1, 0]);
        assert_eq!(out.stats.incumbent_timeline[0].1, 3850.0);
        assert!((out.objective - 3800.0).abs() < 1e-9);
    }

    #[test]
    fn fswap_fixes_build() {
        let m = Model::new(&fixtures::build_interaction()).unwrap();
        let out = tabu_fswap(&m, &Deployment::from_indices([0, 1]), &params()).unwrap();
        assert_eq!(out.best.indices(), vec![1, 0]);
        assert!((out.objective - 3320.0).abs() < 1e-9);
    }

    #[test]
    fn zero_deadline_returns_start() {
        let m = Model::new(&fixtures::compete()).unwrap();
        let p = TabuParams { deadline: Some(0.0), ..TabuParams::default() };
        let out = tabu_bswap(&m, &Deployment::from_indices([0, 1]), &p).unwrap();
        assert_eq!(out.best.indices(), vec![0, 1]);
    }

    #[test]
    fn locked_order_has_no_moves() {
        let mut inst = fixtures::compete();
        inst.precedences.push(crate::instance::Precedence { before: 0.into(), after: 1.into() });
        let m = Model::new(&inst).unwrap();
        let out = tabu_bswap(&m, &Deployment::from_indices([0, 1]), &params()).unwrap();
        assert_eq!(out.best.indices(), vec![0, 1]);
        assert_eq!(out.iterations, 1);
    }
}
