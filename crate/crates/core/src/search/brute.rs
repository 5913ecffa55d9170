use crate::error::{Error, Result};
use crate::eval::{Deployment, PrefixState};
use crate::model::Model;
use crate::search::SearchOutcome;
use crate::stats::SearchStats;

/// Largest instance the brute-force oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 10;

/// Enumerates every order that respects the hard precedences. The returned
/// order is the lexicographically smallest optimum; `stats.optimum_count`
/// holds how many orders tie with it.
pub fn brute_force(model: &Model) -> Result<SearchOutcome> {
    let (objective, optima) = enumerate(model, false)?;
    let count = optima.count;
    Ok(SearchOutcome {
        best: optima.first.map(Deployment::from_indices),
        objective: objective.is_finite().then_some(objective),
        proven: true,
        stats: SearchStats {
            nodes: optima.nodes,
            optimum_count: Some(count),
            ..SearchStats::default()
        },
    })
}

/// Optimal objective and every optimal order.
pub fn brute_force_optima(model: &Model) -> Result<(f64, Vec<Vec<usize>>)> {
    let (objective, optima) = enumerate(model, true)?;
    Ok((objective, optima.all))
}

#[derive(Default)]
struct Optima {
    first: Option<Vec<usize>>,
    all: Vec<Vec<usize>>,
    count: u64,
    nodes: u64,
}

fn enumerate(model: &Model, keep_all: bool) -> Result<(f64, Optima)> {
    let n = model.num_indexes();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(n, BRUTE_FORCE_LIMIT));
    }
    let mut state = PrefixState::new(model);
    let mut best = f64::INFINITY;
    let mut optima = Optima::default();
    walk(model, &mut state, &mut best, &mut optima, keep_all);
    Ok((best, optima))
}

fn walk(model: &Model, state: &mut PrefixState, best: &mut f64, optima: &mut Optima, keep_all: bool) {
    optima.nodes += 1;
    let n = model.num_indexes();
    if state.len() == n {
        let obj = state.partial_objective();
        let tol = 1e-9 * best.abs().max(1.0);
        if !best.is_finite() || obj < *best - tol {
            *best = obj;
            optima.first = Some(state.order().to_vec());
            optima.all.clear();
            optima.count = 0;
        }
        if obj <= *best + tol {
            optima.count += 1;
            if keep_all {
                optima.all.push(state.order().to_vec());
            }
        }
        return;
    }
    for i in 0..n {
        if state.is_built(i) || model.preds(i).iter().any(|&p| !state.is_built(p)) {
            continue;
        }
        state.push(model, i);
        walk(model, state, best, optima, keep_all);
        state.pop(model);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    #[test]
    fn compete_has_unique_optimum() {
        let m = Model::new(&fixtures::compete()).unwrap();
        let out = brute_force(&m).unwrap();
        assert_eq!(out.best.unwrap().indices(), vec![1, 0]);
        assert_eq!(out.stats.optimum_count, Some(1));
    }

    #[test]
    fn dominated_optimum_is_unique() {
        let m = Model::new(&fixtures::dominated()).unwrap();
        let (_, all) = brute_force_optima(&m).unwrap();
        assert_eq!(all, vec![vec![1, 0, 2]]);
    }

    #[test]
    fn too_large_is_rejected() {
        let inst = crate::gen::generate(&crate::gen::GenProfile::custom(11, 4, 3), 1).unwrap();
        let m = Model::new(&inst).unwrap();
        assert!(matches!(brute_force(&m), Err(Error::TooLarge(11, 10))));
    }
}
