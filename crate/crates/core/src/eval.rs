//! The area-under-the-improvement-curve objective.
//!
//! Building the k-th index costs `C_k` seconds, during which the workload
//! still runs at the runtime `R_{k-1}` reached after the previous build, so
//! a deployment scores `sum_k R_{k-1} * C_k`. A plan becomes usable once all
//! of its indexes exist; each query runs with its fastest usable plan; an
//! index is cheaper to build by the best speedup among already built helpers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::IndexId;
use crate::model::Model;

/// A build order: position `k` holds the `k`-th index to be built.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Deployment {
    pub order: Vec<IndexId>,
}

impl Deployment {
    pub fn new(order: Vec<IndexId>) -> Self {
        Self { order }
    }

    pub fn from_indices(order: impl IntoIterator<Item = usize>) -> Self {
        Self {
            order: order.into_iter().map(IndexId::from).collect(),
        }
    }

    /// The identity order `0, 1, .., n-1`.
    pub fn identity(n: usize) -> Self {
        Self::from_indices(0..n)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.order.iter().map(|i| i.index()).collect()
    }

    /// `positions()[i]` is the position of index `i`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.order.len()];
        for (k, i) in self.order.iter().enumerate() {
            if let Some(slot) = pos.get_mut(i.index()) {
                *slot = k;
            }
        }
        pos
    }

    /// Fails unless this is a permutation of `0..n`.
    pub fn check_permutation(&self, n: usize) -> Result<()> {
        if self.order.len() != n {
            return Err(Error::NotAPermutation(format!(
                "expected {n} indexes, got {}",
                self.order.len()
            )));
        }
        let mut seen = vec![false; n];
        for i in &self.order {
            let k = i.index();
            if k >= n {
                return Err(Error::NotAPermutation(format!("index {k} out of range")));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::NotAPermutation(format!("index {k} repeated")));
            }
        }
        Ok(())
    }
}

/// Cost of building `i` when exactly the indexes flagged in `built` exist.
pub fn build_cost(model: &Model, i: usize, built: &[bool]) -> Result<f64> {
    if i >= model.num_indexes() {
        return Err(Error::UnknownIndex(i));
    }
    if built.get(i).copied().unwrap_or(false) {
        return Err(Error::AlreadyBuilt(i));
    }
    Ok(cost_given(model, i, |h| built.get(h).copied().unwrap_or(false)))
}

#[inline]
pub(crate) fn cost_given(model: &Model, i: usize, is_built: impl Fn(usize) -> bool) -> f64 {
    let help = model.helpers[i]
        .iter()
        .filter(|&&(h, _)| is_built(h))
        .map(|&(_, c)| c)
        .fold(0.0, f64::max);
    model.ctime[i] - help
}

/// Total workload runtime when exactly the flagged indexes exist.
pub fn runtime_after(model: &Model, built: &[bool]) -> f64 {
    let has = |i: usize| built.get(i).copied().unwrap_or(false);
    (0..model.num_queries())
        .map(|q| {
            let best = model.plans_of_query[q]
                .iter()
                .filter(|&&p| model.plan_indexes[p].iter().all(|&i| has(i)))
                .map(|&p| model.plan_speedup[p])
                .fold(0.0, f64::max);
            model.qtime[q] - best
        })
        .sum()
}

/// Full evaluation of a deployment with per-step traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub objective: f64,
    /// `R_0 ..= R_n`; `R_0` is the runtime with nothing built.
    pub step_runtime: Vec<f64>,
    /// `C_1 ..= C_n`, stored zero-based.
    pub step_cost: Vec<f64>,
    /// `query_speedup[q][k]`: speedup of query `q` after `k` builds.
    pub query_speedup: Vec<Vec<f64>>,
    /// `plan_available[p][k]`: plan `p` usable after `k` builds.
    pub plan_available: Vec<Vec<bool>>,
    pub order: Vec<IndexId>,
}

impl EvalResult {
    /// Cumulative objective after each step, zero-based.
    pub fn cumulative_objective(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.step_cost
            .iter()
            .zip(&self.step_runtime)
            .map(|(c, r)| {
                acc += r * c;
                acc
            })
            .collect()
    }

    /// Improvement-curve CSV with header
    /// `step,index_id,start_time_s,build_cost_s,runtime_after_s,cumulative_objective`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from(
            "step,index_id,start_time_s,build_cost_s,runtime_after_s,cumulative_objective\n",
        );
        let cum = self.cumulative_objective();
        let mut start = 0.0;
        for (k, cost) in self.step_cost.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                k + 1,
                self.order[k],
                start,
                cost,
                self.step_runtime[k + 1],
                cum[k]
            );
            start += cost;
        }
        out
    }
}

pub fn evaluate(model: &Model, deployment: &Deployment) -> Result<EvalResult> {
    let n = model.num_indexes();
    deployment.check_permutation(n)?;
    let mut state = PrefixState::new(model);
    let mut step_runtime = Vec::with_capacity(n + 1);
    let mut step_cost = Vec::with_capacity(n);
    let mut query_speedup: Vec<Vec<f64>> = vec![Vec::with_capacity(n + 1); model.num_queries()];
    let mut plan_available: Vec<Vec<bool>> = vec![Vec::with_capacity(n + 1); model.num_plans()];
    let mut record = |state: &PrefixState| {
        for (q, row) in query_speedup.iter_mut().enumerate() {
            row.push(state.best[q]);
        }
        for (p, row) in plan_available.iter_mut().enumerate() {
            row.push(state.missing[p] == 0);
        }
    };
    step_runtime.push(state.runtime);
    record(&state);
    for i in &deployment.order {
        let cost = state.push(model, i.index());
        step_cost.push(cost);
        step_runtime.push(state.runtime);
        record(&state);
    }
    Ok(EvalResult {
        objective: state.partial_objective,
        step_runtime,
        step_cost,
        query_speedup,
        plan_available,
        order: deployment.order.clone(),
    })
}

/// Objective of a full or partial order without traces or checks.
pub fn objective_of(model: &Model, order: &[usize]) -> f64 {
    let mut state = PrefixState::new(model);
    for &i in order {
        state.push(model, i);
    }
    state.partial_objective
}

#[derive(Debug, Clone, Copy)]
struct Undo {
    index: u32,
    objective: f64,
    runtime: f64,
    changes: u32,
}

/// Incremental evaluation of a build prefix.
///
/// Keeps, per query, the best usable speedup and, per plan, the number of
/// its indexes still missing. Building an index touches only the plans that
/// contain it. Steps can be undone in LIFO order with [`PrefixState::pop`].
#[derive(Debug, Clone)]
pub struct PrefixState {
    built: Vec<bool>,
    order: Vec<usize>,
    partial_objective: f64,
    runtime: f64,
    best: Vec<f64>,
    missing: Vec<u32>,
    undo: Vec<Undo>,
    changes: Vec<(u32, f64)>,
}

impl PrefixState {
    pub fn new(model: &Model) -> Self {
        Self {
            built: vec![false; model.num_indexes()],
            order: Vec::with_capacity(model.num_indexes()),
            partial_objective: 0.0,
            runtime: model.base_runtime,
            best: vec![0.0; model.num_queries()],
            missing: model.plan_indexes.iter().map(|s| s.len() as u32).collect(),
            undo: Vec::with_capacity(model.num_indexes()),
            changes: Vec::new(),
        }
    }

    /// State after building `order` from scratch.
    pub fn from_prefix(model: &Model, order: &[usize]) -> Self {
        let mut s = Self::new(model);
        for &i in order {
            s.push(model, i);
        }
        s
    }

    pub fn partial_objective(&self) -> f64 {
        self.partial_objective
    }

    pub fn current_runtime(&self) -> f64 {
        self.runtime
    }

    pub fn is_built(&self, i: usize) -> bool {
        self.built[i]
    }

    pub fn built(&self) -> &[bool] {
        &self.built
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of indexes of plan `p` not built yet.
    pub fn missing(&self, p: usize) -> usize {
        self.missing[p] as usize
    }

    /// Best usable speedup of each query.
    pub fn query_speedup(&self) -> &[f64] {
        &self.best
    }

    /// Cost of building `i` next.
    #[inline]
    pub fn next_cost(&self, model: &Model, i: usize) -> f64 {
        cost_given(model, i, |h| self.built[h])
    }

    /// Value-style extension: returns a new state with `i` appended.
    pub fn extend(&self, model: &Model, i: usize) -> Result<PrefixState> {
        if i >= model.num_indexes() {
            return Err(Error::UnknownIndex(i));
        }
        if self.built[i] {
            return Err(Error::AlreadyBuilt(i));
        }
        let mut next = self.clone();
        next.push(model, i);
        Ok(next)
    }

    /// Builds `i` in place and returns its build cost. `i` must be unbuilt.
    pub fn push(&mut self, model: &Model, i: usize) -> f64 {
        debug_assert!(!self.built[i], "index {i} built twice");
        let cost = self.next_cost(model, i);
        self.undo.push(Undo {
            index: i as u32,
            objective: self.partial_objective,
            runtime: self.runtime,
            changes: self.changes.len() as u32,
        });
        self.partial_objective += self.runtime * cost;
        self.built[i] = true;
        self.order.push(i);
        for &p in &model.plans_of_index[i] {
            self.missing[p] -= 1;
            if self.missing[p] == 0 {
                let q = model.plan_query[p];
                let s = model.plan_speedup[p];
                if s > self.best[q] {
                    self.changes.push((q as u32, self.best[q]));
                    self.runtime -= s - self.best[q];
                    self.best[q] = s;
                }
            }
        }
        cost
    }

    /// Undoes the most recent [`PrefixState::push`].
    pub fn pop(&mut self, model: &Model) -> Option<usize> {
        let u = self.undo.pop()?;
        let i = u.index as usize;
        for &p in &model.plans_of_index[i] {
            self.missing[p] += 1;
        }
        while self.changes.len() > u.changes as usize {
            let (q, old) = self.changes.pop().expect("change trail underflow");
            self.best[q as usize] = old;
        }
        self.partial_objective = u.objective;
        self.runtime = u.runtime;
        self.built[i] = false;
        self.order.pop();
        Some(i)
    }

    /// Objective contributed by building `seq` next, leaving the state unchanged.
    pub fn probe(&mut self, model: &Model, seq: impl IntoIterator<Item = usize>) -> f64 {
        let start = self.partial_objective;
        let mut pushed = 0;
        for i in seq {
            self.push(model, i);
            pushed += 1;
        }
        let end = self.partial_objective;
        for _ in 0..pushed {
            self.pop(model);
        }
        end - start
    }
}

/// Objective change from swapping positions `a < b`.
///
/// Only steps `a..=b` are re-evaluated: the prefix before `a` is untouched
/// and the steps after `b` see the same built set either way.
pub fn swap_delta(model: &Model, deployment: &Deployment, a: usize, b: usize) -> Result<f64> {
    let n = deployment.len();
    if a >= b || b >= n {
        return Err(Error::PositionOutOfRange(format!(
            "swap({a}, {b}) on {n} positions"
        )));
    }
    let order = deployment.indices();
    let mut state = PrefixState::from_prefix(model, &order[..a]);
    Ok(swapped_segment_delta(model, &mut state, &order, a, b))
}

/// Delta of swapping `a < b` given `state` positioned right before `a`.
pub(crate) fn swapped_segment_delta(
    model: &Model,
    state: &mut PrefixState,
    order: &[usize],
    a: usize,
    b: usize,
) -> f64 {
    debug_assert_eq!(state.len(), a);
    let old = state.probe(model, order[a..=b].iter().copied());
    let swapped = std::iter::once(order[b])
        .chain(order[a + 1..b].iter().copied())
        .chain(std::iter::once(order[a]));
    let new = state.probe(model, swapped);
    new - old
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures;

    fn model(inst: &crate::instance::Instance) -> Model {
        Model::new(inst).unwrap()
    }

    fn mask(n: usize, built: &[usize]) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in built {
            m[i] = true;
        }
        m
    }

    #[test]
    fn build_cost_uses_best_built_helper() {
        let m = model(&fixtures::build_interaction());
        assert_eq!(build_cost(&m, 0, &mask(2, &[1])).unwrap(), 4.0);
        assert_eq!(build_cost(&m, 0, &mask(2, &[])).unwrap(), 10.0);
        assert!(matches!(build_cost(&m, 5, &mask(2, &[])), Err(Error::UnknownIndex(5))));
        assert!(matches!(build_cost(&m, 1, &mask(2, &[1])), Err(Error::AlreadyBuilt(1))));
    }

    #[test]
    fn build_cost_takes_max_of_two_helpers() {
        let mut inst = fixtures::dominated();
        inst.build_interactions = vec![
            crate::instance::BuildInteraction { target: IndexId(0), helper: IndexId(1), cspdup: 3.0 },
            crate::instance::BuildInteraction { target: IndexId(0), helper: IndexId(2), cspdup: 7.0 },
        ];
        let m = model(&inst);
        assert_eq!(build_cost(&m, 0, &mask(3, &[1, 2])).unwrap(), 3.0);
    }

    #[test]
    fn runtime_after_examples() {
        let m = model(&fixtures::compete());
        assert_eq!(runtime_after(&m, &mask(2, &[])), 100.0);
        assert_eq!(runtime_after(&m, &mask(2, &[0, 1])), 80.0);
        let m = model(&fixtures::alliance());
        assert_eq!(runtime_after(&m, &mask(2, &[0])), 100.0);
    }

    #[test]
    fn worked_objectives() {
        let m = model(&fixtures::compete());
        let r = evaluate(&m, &Deployment::from_indices([0, 1])).unwrap();
        assert_eq!(r.objective, 3850.0);
        assert_eq!(r.step_runtime, vec![100.0, 95.0, 80.0]);
        assert_eq!(r.step_cost, vec![10.0, 30.0]);
        assert_eq!(r.query_speedup[0], vec![0.0, 5.0, 20.0]);
        assert_eq!(r.plan_available[1], vec![false, false, true]);
        let r = evaluate(&m, &Deployment::from_indices([1, 0])).unwrap();
        assert_eq!(r.objective, 3800.0);
        let m = model(&fixtures::build_interaction());
        assert_eq!(evaluate(&m, &Deployment::from_indices([1, 0])).unwrap().objective, 3320.0);
    }

    #[test]
    fn evaluate_rejects_non_permutation() {
        let m = model(&fixtures::compete());
        assert!(evaluate(&m, &Deployment::from_indices([0, 0])).is_err());
        assert!(evaluate(&m, &Deployment::from_indices([0])).is_err());
    }

    #[test]
    fn extend_matches_evaluate() {
        let m = model(&fixtures::compete());
        let s0 = PrefixState::new(&m);
        let s1 = s0.extend(&m, 1).unwrap();
        assert_eq!(s1.partial_objective(), 3000.0);
        assert_eq!(s1.current_runtime(), 80.0);
        let s2 = s1.extend(&m, 0).unwrap();
        assert_eq!(s2.partial_objective(), 3800.0);
        assert!(matches!(s2.extend(&m, 0), Err(Error::AlreadyBuilt(0))));
    }

    #[test]
    fn pop_restores_state() {
        let m = model(&fixtures::dominated());
        let mut s = PrefixState::new(&m);
        s.push(&m, 0);
        let snapshot = (s.partial_objective(), s.current_runtime(), s.query_speedup().to_vec());
        s.push(&m, 2);
        s.push(&m, 1);
        s.pop(&m);
        s.pop(&m);
        assert_eq!(
            (s.partial_objective(), s.current_runtime(), s.query_speedup().to_vec()),
            snapshot
        );
    }

    #[test]
    fn swap_delta_examples() {
        let m = model(&fixtures::build_interaction());
        let d = swap_delta(&m, &Deployment::from_indices([0, 1]), 0, 1).unwrap();
        assert_eq!(d, -530.0);
        assert!(swap_delta(&m, &Deployment::from_indices([0, 1]), 1, 1).is_err());
        assert!(swap_delta(&m, &Deployment::from_indices([0, 1]), 0, 2).is_err());
    }

    #[test]
    fn swap_of_equal_disjoint_indexes_is_free() {
        let inst = crate::instance::Instance {
            name: "twins".into(),
            indexes: (0..3)
                .map(|k| crate::instance::IndexDef { id: IndexId::from(k), ctime: 10.0 })
                .collect(),
            queries: (0..3)
                .map(|k| crate::instance::QueryDef { id: crate::instance::QueryId::from(k), qtime: 50.0 })
                .collect(),
            plans: (0..3)
                .map(|k| crate::instance::PlanDef {
                    id: crate::instance::PlanId::from(k),
                    query: crate::instance::QueryId::from(k),
                    indexes: vec![IndexId::from(k)],
                    qspdup: if k == 1 { 30.0 } else { 20.0 },
                })
                .collect(),
            build_interactions: vec![],
            precedences: vec![],
        };
        let m = model(&inst);
        let d = swap_delta(&m, &Deployment::from_indices([0, 1, 2]), 0, 2).unwrap();
        assert!(d.abs() < 1e-9);
    }

    #[test]
    fn curve_csv_columns() {
        let m = model(&fixtures::compete());
        let r = evaluate(&m, &Deployment::from_indices([1, 0])).unwrap();
        let csv = r.curve_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "step,index_id,start_time_s,build_cost_s,runtime_after_s,cumulative_objective"
        );
        assert_eq!(lines[1], "1,1,0,30,80,3000");
        assert_eq!(lines[2], "2,0,30,10,80,3800");
    }
}
