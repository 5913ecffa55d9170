use crate::eval::{Deployment, PrefixState};
use crate::model::Model;

/// Interaction-guided greedy: repeatedly appends the index with the best
/// ratio of benefit to current build cost.
///
/// The benefit is the immediate runtime drop plus, for every plan containing
/// the candidate that would beat the query's runtime after the step, that
/// surplus split evenly over the plan's unbuilt indexes (the candidate
/// included). Only indexes whose predecessors are placed are candidates; the
/// lowest id wins ties.
pub fn greedy(model: &Model) -> Deployment {
    let n = model.num_indexes();
    let mut state = PrefixState::new(model);
    while state.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if state.is_built(i) || model.preds(i).iter().any(|&p| !state.is_built(p)) {
                continue;
            }
            let density = benefit(model, &state, i) / state.next_cost(model, i);
            if best.is_none_or(|(_, d)| density > d) {
                best = Some((i, density));
            }
        }
        let (i, _) = best.expect("hard precedences are acyclic");
        state.push(model, i);
    }
    Deployment::from_indices(state.order().iter().copied())
}

fn benefit(model: &Model, state: &PrefixState, i: usize) -> f64 {
    let current = state.query_speedup();
    let mut queries: Vec<usize> = model.plans_of_index(i).iter().map(|&p| model.plan_query(p)).collect();
    queries.sort_unstable();
    queries.dedup();
    let mut total = 0.0;
    for q in queries {
        // Best speedup once i is built.
        let next = model
            .plans_of_query(q)
            .iter()
            .filter(|&&p| {
                let missing = state.missing(p);
                missing == 0 || (missing == 1 && model.plan_indexes(p).contains(&i))
            })
            .map(|&p| model.plan_speedup(p))
            .fold(current[q], f64::max);
        total += next - current[q];
        for &p in model.plans_of_query(q) {
            if !model.plan_indexes(p).contains(&i) {
                continue;
            }
            let surplus = model.plan_speedup(p) - next;
            let missing = state.missing(p);
            if surplus > 0.0 && missing > 0 {
                total += surplus / missing as f64;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    fn run(inst: &crate::instance::Instance) -> Vec<usize> {
        greedy(&Model::new(inst).unwrap()).indices()
    }

    #[test]
    fn compete_takes_denser_first() {
        assert_eq!(run(&fixtures::compete()), vec![1, 0]);
    }

    #[test]
    fn alliance_tie_goes_to_lowest_id() {
        assert_eq!(run(&fixtures::alliance()), vec![0, 1]);
    }

    #[test]
    fn single_index() {
        assert_eq!(run(&fixtures::single()), vec![0]);
    }

    #[test]
    fn attributes_joint_plan_surplus() {
        // 50 s of joint speedup split over two missing indexes.
        let m = Model::new(&fixtures::alliance()).unwrap();
        let s = PrefixState::new(&m);
        assert!((benefit(&m, &s, 0) - 25.0).abs() < 1e-12);
    }
}
