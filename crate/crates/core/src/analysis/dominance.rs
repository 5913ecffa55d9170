//! Pairs where one index is better than the other in every context.

use fixedbitset::FixedBitSet;

use crate::constraints::ConstraintSet;
use crate::model::Model;

/// `(dominated, dominator)` pairs: building the dominated index before its
/// dominator is never optimal under the current constraints.
///
/// For a candidate pair the constraints pin down two sets: indexes that are
/// surely built before the dominated one (its ancestors) and indexes that may
/// be built before the dominator (everything except the pair and the
/// dominator's descendants). Benefits and costs are bounded over every
/// context between those two sets, and the pair is reported only when
/// swapping the two strictly improves every ordering that has them the wrong
/// way round.
pub fn detect_dominated(model: &Model, cs: &ConstraintSet) -> Vec<(usize, usize)> {
    let n = model.num_indexes();
    let hard = ConstraintSet::from_model(model);
    let mut out = Vec::new();
    for i in 0..n {
        for k in 0..n {
            if i != k && !cs.related(i, k) && dominates(model, cs, &hard, i, k) {
                out.push((i, k));
            }
        }
    }
    out
}

fn dominates(model: &Model, cs: &ConstraintSet, hard: &ConstraintSet, i: usize, k: usize) -> bool {
    let later = cs.descendants(k);
    let always = cs.ancestors(i);
    // The swapped order must still satisfy the hard precedences.
    if hard.descendants(i).ones().any(|x| !later.contains(x)) {
        return false;
    }
    if hard.ancestors(k).ones().any(|x| !always.contains(x)) {
        return false;
    }
    let n = model.num_indexes();
    let mut maybe = FixedBitSet::with_capacity(n);
    maybe.insert_range(..);
    maybe.difference_with(later);
    maybe.remove(i);
    maybe.remove(k);

    // Build cost of k cannot improve beyond what its sure predecessors give.
    let sure_help = best_help(model, k, |h| always.contains(h));
    if model
        .helpers(k)
        .iter()
        .any(|&(h, c)| !always.contains(h) && !later.contains(h) && c > sure_help)
    {
        return false;
    }
    // Whatever i does for the builds in between, k does at least as well.
    for &(t, c) in model.helps(i) {
        if t == k || !maybe.contains(t) || always.contains(t) {
            continue;
        }
        let by_k = model.helpers(t).iter().find(|&&(h, _)| h == k).map_or(0.0, |&(_, c)| c);
        if c > by_k {
            return false;
        }
    }
    let max_cost_k = model.ctime(k) - sure_help;
    let min_cost_i = model.ctime(i) - best_help(model, i, |h| maybe.contains(h));

    let max_benefit_i = benefit_bound(model, i, |x| maybe.contains(x), |x| always.contains(x));
    let min_benefit_k = min_benefit(model, k, always, &maybe);

    if min_cost_i < max_cost_k {
        return false;
    }
    let tol = 1e-9 * max_benefit_i.abs().max(1.0);
    min_benefit_k > max_benefit_i + tol
        || (min_cost_i > max_cost_k + 1e-9 * max_cost_k.max(1.0)
            && min_benefit_k >= max_benefit_i
            && min_benefit_k > tol)
}

fn best_help(model: &Model, i: usize, present: impl Fn(usize) -> bool) -> f64 {
    model
        .helpers(i)
        .iter()
        .filter(|&&(h, _)| present(h))
        .map(|&(_, c)| c)
        .fold(0.0, f64::max)
}

/// Largest runtime drop from building `i` when the built set lies between
/// `low` and `high`.
fn benefit_bound(
    model: &Model,
    i: usize,
    high: impl Fn(usize) -> bool,
    low: impl Fn(usize) -> bool,
) -> f64 {
    let mut total = 0.0;
    for q in queries_of(model, i) {
        let mut with_i = 0.0f64;
        let mut base = 0.0f64;
        for &p in model.plans_of_query(q) {
            let idx = model.plan_indexes(p);
            let s = model.plan_speedup(p);
            if idx.contains(&i) && idx.iter().all(|&x| x == i || high(x)) {
                with_i = with_i.max(s);
            }
            if idx.iter().all(|&x| low(x)) {
                base = base.max(s);
            }
        }
        total += (with_i - base).max(0.0);
    }
    total
}

/// Smallest runtime drop from building `k` over the same range of contexts.
fn min_benefit(model: &Model, k: usize, low: &FixedBitSet, high: &FixedBitSet) -> f64 {
    let mut total = 0.0;
    for q in queries_of(model, k) {
        let mut with_k = 0.0f64;
        let mut base = 0.0f64;
        for &p in model.plans_of_query(q) {
            let idx = model.plan_indexes(p);
            let s = model.plan_speedup(p);
            if idx.contains(&k) {
                if idx.iter().all(|&x| x == k || low.contains(x)) {
                    with_k = with_k.max(s);
                }
            } else if idx.iter().all(|&x| high.contains(x)) {
                base = base.max(s);
            }
        }
        total += (with_k - base).max(0.0);
    }
    total
}

fn queries_of(model: &Model, i: usize) -> Vec<usize> {
    let mut qs: Vec<usize> = model.plans_of_index(i).iter().map(|&p| model.plan_query(p)).collect();
    qs.sort_unstable();
    qs.dedup();
    qs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixtures, Instance};

    fn run(inst: &Instance) -> Vec<(usize, usize)> {
        let m = Model::new(inst).unwrap();
        detect_dominated(&m, &ConstraintSet::from_model(&m))
    }

    #[test]
    fn dominated_fixture() {
        let found = run(&fixtures::dominated());
        assert!(found.contains(&(0, 1)), "{found:?}");
        assert!(!found.iter().any(|&(i, k)| (k, i) == (0, 1)));
    }

    #[test]
    fn cheaper_index_is_not_dominated() {
        assert!(run(&fixtures::compete()).is_empty());
    }

    #[test]
    fn twins_tie() {
        let text = r#"{"name":"twins","indexes":[{"id":0,"ctime":5},{"id":1,"ctime":5}],
          "queries":[{"id":0,"qtime":10},{"id":1,"qtime":10}],
          "plans":[{"id":0,"query":0,"indexes":[0],"qspdup":4},
                   {"id":1,"query":1,"indexes":[1],"qspdup":4}]}"#;
        assert!(run(&Instance::from_json_checked(text).unwrap()).is_empty());
    }
}
