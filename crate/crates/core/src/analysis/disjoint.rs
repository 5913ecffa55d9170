//! Density ordering of indexes that do not interact with each other.

use crate::constraints::ConstraintSet;
use crate::model::Model;

/// `(earlier, later)` pairs. For two unrelated indexes `f` and `s` that do
/// not interact, when every index interacting with either one is forced
/// after `f` or before `s`, both see a fixed context and their densities
/// (runtime drop per second of build) are exact. The denser one goes first.
pub fn detect_disjoint_order(model: &Model, cs: &ConstraintSet) -> Vec<(usize, usize)> {
    let n = model.num_indexes();
    let interacting: Vec<Vec<usize>> = (0..n).map(|i| model.interacting(i)).collect();
    let mut out = Vec::new();
    for f in 0..n {
        for s in 0..n {
            if f == s || cs.related(f, s) || interacting[f].binary_search(&s).is_ok() {
                continue;
            }
            let settled = interacting[f]
                .iter()
                .chain(&interacting[s])
                .all(|&x| cs.precedes(f, x) || cs.precedes(x, s));
            if !settled {
                continue;
            }
            let before = |x: usize| cs.precedes(x, s);
            let (bf, cf) = benefit_and_cost(model, f, before);
            let (bs, cs_) = benefit_and_cost(model, s, before);
            let lhs = bf * cs_;
            let rhs = bs * cf;
            if lhs > rhs + 1e-9 * lhs.abs().max(1.0) {
                out.push((f, s));
            }
        }
    }
    out
}

/// Runtime drop and build cost of `i` when exactly the indexes satisfying
/// `built` are present.
pub(crate) fn benefit_and_cost(model: &Model, i: usize, built: impl Fn(usize) -> bool) -> (f64, f64) {
    let mut queries: Vec<usize> = model.plans_of_index(i).iter().map(|&p| model.plan_query(p)).collect();
    queries.sort_unstable();
    queries.dedup();
    let mut benefit = 0.0;
    for q in queries {
        let mut with_i = 0.0f64;
        let mut base = 0.0f64;
        for &p in model.plans_of_query(q) {
            let idx = model.plan_indexes(p);
            let s = model.plan_speedup(p);
            if idx.iter().all(|&x| x == i || built(x)) {
                with_i = with_i.max(s);
                if !idx.contains(&i) {
                    base = base.max(s);
                }
            }
        }
        benefit += with_i - base;
    }
    let help = model
        .helpers(i)
        .iter()
        .filter(|&&(h, _)| built(h))
        .map(|&(_, c)| c)
        .fold(0.0, f64::max);
    (benefit, model.ctime(i) - help)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixtures, Instance};

    fn independent(ctimes: &[f64], speedups: &[f64]) -> Model {
        let indexes: Vec<String> = ctimes
            .iter()
            .enumerate()
            .map(|(k, c)| format!(r#"{{"id":{k},"ctime":{c}}}"#))
            .collect();
        let queries: Vec<String> =
            (0..ctimes.len()).map(|k| format!(r#"{{"id":{k},"qtime":100}}"#)).collect();
        let plans: Vec<String> = speedups
            .iter()
            .enumerate()
            .map(|(k, s)| format!(r#"{{"id":{k},"query":{k},"indexes":[{k}],"qspdup":{s}}}"#))
            .collect();
        let text = format!(
            r#"{{"name":"indep","indexes":[{}],"queries":[{}],"plans":[{}]}}"#,
            indexes.join(","),
            queries.join(","),
            plans.join(",")
        );
        Model::new(&Instance::from_json_checked(&text).unwrap()).unwrap()
    }

    #[test]
    fn denser_first() {
        let m = independent(&[10.0, 10.0], &[5.0, 20.0]);
        let found = detect_disjoint_order(&m, &ConstraintSet::from_model(&m));
        assert_eq!(found, vec![(1, 0)]);
    }

    #[test]
    fn three_densities_give_total_order() {
        let m = independent(&[10.0, 10.0, 10.0], &[10.0, 30.0, 20.0]);
        let found = detect_disjoint_order(&m, &ConstraintSet::from_model(&m));
        assert_eq!(found, vec![(1, 0), (1, 2), (2, 0)]);
    }

    #[test]
    fn interacting_indexes_excluded() {
        let m = Model::new(&fixtures::alliance()).unwrap();
        assert!(detect_disjoint_order(&m, &ConstraintSet::from_model(&m)).is_empty());
    }
}
