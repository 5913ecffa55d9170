//! Dense lookup tables derived from a canonical [`Instance`].

use crate::error::{Error, Result};
use crate::instance::{IndexId, Instance};

/// Read-only, index-addressed view of an instance used by every algorithm.
///
/// Built once per instance and shared by reference; it is `Sync`.
#[derive(Debug, Clone)]
pub struct Model {
    pub(crate) name: String,
    pub(crate) ctime: Vec<f64>,
    pub(crate) qtime: Vec<f64>,
    pub(crate) plan_query: Vec<usize>,
    pub(crate) plan_indexes: Vec<Vec<usize>>,
    pub(crate) plan_speedup: Vec<f64>,
    pub(crate) plans_of_query: Vec<Vec<usize>>,
    pub(crate) plans_of_index: Vec<Vec<usize>>,
    /// For each target: `(helper, cspdup)`.
    pub(crate) helpers: Vec<Vec<(usize, f64)>>,
    /// For each helper: `(target, cspdup)`.
    pub(crate) helps: Vec<Vec<(usize, f64)>>,
    pub(crate) preds: Vec<Vec<usize>>,
    pub(crate) succs: Vec<Vec<usize>>,
    pub(crate) base_runtime: f64,
    pub(crate) final_runtime: f64,
    pub(crate) min_cost: Vec<f64>,
}

impl Model {
    /// Builds the tables. The instance must be canonical and valid.
    pub fn new(instance: &Instance) -> Result<Model> {
        let report = instance.validate();
        if !report.is_empty() {
            return Err(Error::Invalid(report));
        }
        Ok(Self::new_unchecked(instance))
    }

    pub(crate) fn new_unchecked(instance: &Instance) -> Model {
        let n = instance.num_indexes();
        let nq = instance.num_queries();
        let mut ctime = vec![0.0; n];
        for d in &instance.indexes {
            ctime[d.id.index()] = d.ctime;
        }
        let mut qtime = vec![0.0; nq];
        for d in &instance.queries {
            qtime[d.id.index()] = d.qtime;
        }
        let np = instance.num_plans();
        let mut plan_query = vec![0; np];
        let mut plan_indexes = vec![Vec::new(); np];
        let mut plan_speedup = vec![0.0; np];
        let mut plans_of_query = vec![Vec::new(); nq];
        let mut plans_of_index = vec![Vec::new(); n];
        for p in &instance.plans {
            let k = p.id.index();
            plan_query[k] = p.query.index();
            let mut set: Vec<usize> = p.indexes.iter().map(|i| i.index()).collect();
            set.sort_unstable();
            set.dedup();
            for &i in &set {
                plans_of_index[i].push(k);
            }
            plan_indexes[k] = set;
            plan_speedup[k] = p.qspdup;
            plans_of_query[p.query.index()].push(k);
        }
        let mut helpers = vec![Vec::new(); n];
        let mut helps = vec![Vec::new(); n];
        for bi in &instance.build_interactions {
            let (t, h) = (bi.target.index(), bi.helper.index());
            helpers[t].push((h, bi.cspdup));
            helps[h].push((t, bi.cspdup));
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for p in &instance.precedences {
            preds[p.after.index()].push(p.before.index());
            succs[p.before.index()].push(p.after.index());
        }
        for v in preds.iter_mut().chain(succs.iter_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        let base_runtime: f64 = qtime.iter().sum();
        let final_runtime: f64 = plans_of_query
            .iter()
            .enumerate()
            .map(|(q, ps)| {
                let best = ps.iter().map(|&p| plan_speedup[p]).fold(0.0, f64::max);
                qtime[q] - best
            })
            .sum();
        let min_cost = (0..n)
            .map(|i| ctime[i] - helpers[i].iter().map(|&(_, c)| c).fold(0.0, f64::max))
            .collect();
        Model {
            name: instance.name.clone(),
            ctime,
            qtime,
            plan_query,
            plan_indexes,
            plan_speedup,
            plans_of_query,
            plans_of_index,
            helpers,
            helps,
            preds,
            succs,
            base_runtime,
            final_runtime,
            min_cost,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_indexes(&self) -> usize {
        self.ctime.len()
    }

    pub fn num_queries(&self) -> usize {
        self.qtime.len()
    }

    pub fn num_plans(&self) -> usize {
        self.plan_query.len()
    }

    pub fn ctime(&self, i: usize) -> f64 {
        self.ctime[i]
    }

    pub fn qtime(&self, q: usize) -> f64 {
        self.qtime[q]
    }

    pub fn plan_indexes(&self, p: usize) -> &[usize] {
        &self.plan_indexes[p]
    }

    pub fn plan_speedup(&self, p: usize) -> f64 {
        self.plan_speedup[p]
    }

    pub fn plan_query(&self, p: usize) -> usize {
        self.plan_query[p]
    }

    pub fn plans_of_query(&self, q: usize) -> &[usize] {
        &self.plans_of_query[q]
    }

    pub fn plans_of_index(&self, i: usize) -> &[usize] {
        &self.plans_of_index[i]
    }

    /// `(helper, cspdup)` pairs that can reduce the cost of building `i`.
    pub fn helpers(&self, i: usize) -> &[(usize, f64)] {
        &self.helpers[i]
    }

    /// `(target, cspdup)` pairs that `i` speeds up.
    pub fn helps(&self, i: usize) -> &[(usize, f64)] {
        &self.helps[i]
    }

    /// Direct hard predecessors of `i`.
    pub fn preds(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    /// Direct hard successors of `i`.
    pub fn succs(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    pub fn has_precedences(&self) -> bool {
        self.preds.iter().any(|p| !p.is_empty())
    }

    /// Total runtime with no index built.
    pub fn base_runtime(&self) -> f64 {
        self.base_runtime
    }

    /// Total runtime once every index is built.
    pub fn final_runtime(&self) -> f64 {
        self.final_runtime
    }

    /// Cheapest possible build cost of `i` (best helper present).
    pub fn min_cost(&self, i: usize) -> f64 {
        self.min_cost[i]
    }

    /// True when `order` respects every hard precedence.
    pub fn respects_precedences(&self, order: &[IndexId]) -> bool {
        let mut pos = vec![usize::MAX; self.num_indexes()];
        for (k, i) in order.iter().enumerate() {
            pos[i.index()] = k;
        }
        (0..self.num_indexes()).all(|i| self.preds[i].iter().all(|&p| pos[p] < pos[i]))
    }

    /// Indexes that interact with `i` through a shared plan, a competing plan
    /// of the same query, a build interaction in either direction or a hard
    /// precedence. Sorted, without `i` itself.
    pub fn interacting(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &p in &self.plans_of_index[i] {
            let q = self.plan_query[p];
            for &other in &self.plans_of_query[q] {
                out.extend_from_slice(&self.plan_indexes[other]);
            }
        }
        out.extend(self.helpers[i].iter().map(|&(h, _)| h));
        out.extend(self.helps[i].iter().map(|&(t, _)| t));
        out.extend_from_slice(&self.preds[i]);
        out.extend_from_slice(&self.succs[i]);
        out.sort_unstable();
        out.dedup();
        out.retain(|&j| j != i);
        out
    }

    /// Sub-problem over the indexes in `keep` (renumbered in the given
    /// order). Plans that use a dropped index disappear, as do interactions
    /// and precedences touching one. Queries are kept as they are.
    pub fn restrict(&self, keep: &[usize]) -> Model {
        let mut new_id = vec![usize::MAX; self.num_indexes()];
        for (k, &i) in keep.iter().enumerate() {
            new_id[i] = k;
        }
        let n = keep.len();
        let nq = self.num_queries();
        let mut plan_query = Vec::new();
        let mut plan_indexes = Vec::new();
        let mut plan_speedup = Vec::new();
        let mut plans_of_query = vec![Vec::new(); nq];
        let mut plans_of_index = vec![Vec::new(); n];
        for p in 0..self.num_plans() {
            if self.plan_indexes[p].iter().any(|&i| new_id[i] == usize::MAX) {
                continue;
            }
            let k = plan_query.len();
            let mut set: Vec<usize> = self.plan_indexes[p].iter().map(|&i| new_id[i]).collect();
            set.sort_unstable();
            for &i in &set {
                plans_of_index[i].push(k);
            }
            plan_query.push(self.plan_query[p]);
            plan_indexes.push(set);
            plan_speedup.push(self.plan_speedup[p]);
            plans_of_query[self.plan_query[p]].push(k);
        }
        let remap = |list: &[(usize, f64)]| -> Vec<(usize, f64)> {
            list.iter()
                .filter(|&&(j, _)| new_id[j] != usize::MAX)
                .map(|&(j, c)| (new_id[j], c))
                .collect()
        };
        let remap_ids = |list: &[usize]| -> Vec<usize> {
            let mut v: Vec<usize> = list
                .iter()
                .filter(|&&j| new_id[j] != usize::MAX)
                .map(|&j| new_id[j])
                .collect();
            v.sort_unstable();
            v
        };
        let helpers: Vec<_> = keep.iter().map(|&i| remap(&self.helpers[i])).collect();
        let helps: Vec<_> = keep.iter().map(|&i| remap(&self.helps[i])).collect();
        let ctime: Vec<f64> = keep.iter().map(|&i| self.ctime[i]).collect();
        let final_runtime = plans_of_query
            .iter()
            .enumerate()
            .map(|(q, ps): (usize, &Vec<usize>)| {
                let best = ps.iter().map(|&p| plan_speedup[p]).fold(0.0, f64::max);
                self.qtime[q] - best
            })
            .sum();
        let min_cost = (0..n)
            .map(|i| ctime[i] - helpers[i].iter().map(|&(_, c)| c).fold(0.0, f64::max))
            .collect();
        Model {
            name: self.name.clone(),
            ctime,
            qtime: self.qtime.clone(),
            plan_query,
            plan_indexes,
            plan_speedup,
            plans_of_query,
            plans_of_index,
            helpers,
            helps,
            preds: keep.iter().map(|&i| remap_ids(&self.preds[i])).collect(),
            succs: keep.iter().map(|&i| remap_ids(&self.succs[i])).collect(),
            base_runtime: self.base_runtime,
            final_runtime,
            min_cost,
        }
    }
}
