//! Depth-first search over position assignments.
//!
//! Every variable is an index, its value a position. Domains are bitsets over
//! positions. Some variables can be pinned up front (large neighborhood
//! search relaxes only a few), the rest are searched with first-fail
//! branching. Whenever the next position's owner is known, the index is
//! appended to an incremental prefix so the partial objective and bound stay
//! exact.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::clock::Clock;
use crate::constraints::ConstraintSet;
use crate::eval::PrefixState;
use crate::model::Model;
use crate::stats::SearchStats;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct EngineLimits {
    pub max_nodes: Option<u64>,
    pub max_failures: Option<u64>,
    pub deadline: Option<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct EngineResult {
    /// Best order found that beats the starting incumbent.
    pub improved: Option<(Vec<usize>, f64)>,
    /// True when the whole tree was explored.
    pub exhausted: bool,
    pub stats: SearchStats,
}

type Domains = Vec<FixedBitSet>;

struct Engine<'a> {
    model: &'a Model,
    n: usize,
    tie_rank: Vec<usize>,
    /// Position owned by a pinned variable.
    owner: Vec<Option<usize>>,
    free: Vec<usize>,
    slot: Vec<usize>,
    /// Positions no pinned variable owns.
    open: Vec<usize>,
    /// Open positions in `0..p`, for Hall interval counting.
    free_before: Vec<usize>,
    edges: Vec<(usize, usize)>,
    blocks: Vec<Vec<usize>>,
    fixed_at: Vec<Option<usize>>,
    limits: EngineLimits,
    /// First position of the pinned suffix. Past it the built set no longer
    /// depends on the search, so its cost is a constant.
    tail_start: usize,
    tail_objective: f64,
    /// Runtime once everything before the suffix is built.
    tail_runtime: f64,
    /// `later_floor[p]`: lower bound on the steps at positions
    /// `p..tail_start`. Before position `q` the built set lies within the
    /// indexes pinned before `q` plus every free one, and building more
    /// never raises runtime or cost.
    later_floor: Vec<f64>,
    state: PrefixState,
    remaining_min_cost: f64,
    incumbent: f64,
    improved: Option<(Vec<usize>, f64)>,
    aborted: bool,
    stats: SearchStats,
    /// Lowest prefix cost seen per built set whose subtree was fully
    /// explored. The cost of finishing depends only on that set.
    memoize: bool,
    settled: HashMap<u64, f64>,
}

const SETTLED_CAP: usize = 1 << 20;

/// Searches all completions of `fixed` (pinned positions per index) that
/// satisfy `cs`, keeping only orders strictly better than `incumbent`.
///
/// Branching takes the smallest domain first; ties go to the lowest
/// `tie_rank` (the index id when absent).
pub(crate) fn run(
    model: &Model,
    cs: &ConstraintSet,
    fixed: &[Option<usize>],
    tie_rank: Option<&[usize]>,
    incumbent: Option<f64>,
    limits: EngineLimits,
    clock: &mut Clock,
) -> EngineResult {
    let n = model.num_indexes();
    let mut owner = vec![None; n];
    for (i, f) in fixed.iter().enumerate() {
        if let Some(p) = *f {
            owner[p] = Some(i);
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut slot = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        slot[i] = k;
    }
    let mut free_before = vec![0; n + 1];
    for p in 0..n {
        free_before[p + 1] = free_before[p] + usize::from(owner[p].is_none());
    }
    let edges: Vec<(usize, usize)> = cs
        .precedence_pairs()
        .filter(|&(a, b)| fixed[a].is_none() || fixed[b].is_none())
        .collect();
    let blocks: Vec<Vec<usize>> = cs
        .blocks()
        .iter()
        .filter(|b| b.iter().any(|&m| fixed[m].is_none()))
        .cloned()
        .collect();
    let mut domains: Domains = Vec::with_capacity(free.len());
    for &i in &free {
        let (lo, hi) = cs.domain(i);
        let mut d = FixedBitSet::with_capacity(n);
        for p in lo..=hi.min(n.saturating_sub(1)) {
            if owner[p].is_none() {
                d.insert(p);
            }
        }
        domains.push(d);
    }
    let tail_start = (0..n).rev().find(|&p| owner[p].is_none()).map_or(0, |p| p + 1);
    let mut state = PrefixState::new(model);
    for i in (0..n).filter(|&i| fixed[i].is_none_or(|p| p < tail_start)) {
        state.push(model, i);
    }
    let tail_runtime = state.current_runtime();
    let tail_objective = state.probe(model, (tail_start..n).map(|p| owner[p].expect("pinned suffix")));
    let mut floor_state = PrefixState::new(model);
    for &i in &free {
        floor_state.push(model, i);
    }
    let cheapest_free = free.iter().map(|&i| model.min_cost(i)).fold(f64::INFINITY, f64::min);
    let mut later_floor = vec![0.0; tail_start + 1];
    for q in 0..tail_start {
        let runtime = floor_state.current_runtime();
        later_floor[q] = match owner[q] {
            Some(i) => runtime * floor_state.push(model, i),
            None => runtime * cheapest_free,
        };
    }
    for q in (0..tail_start).rev() {
        later_floor[q] += later_floor[q + 1];
    }
    let n_free = free.len();
    let no_blocks = blocks.is_empty();
    let mut engine = Engine {
        model,
        n,
        open: (0..n).filter(|&p| owner[p].is_none()).collect(),
        tie_rank: tie_rank.map_or_else(|| (0..n).collect(), <[usize]>::to_vec),
        owner,
        free,
        slot,
        free_before,
        edges,
        blocks,
        fixed_at: fixed.to_vec(),
        limits,
        tail_start,
        tail_objective,
        tail_runtime,
        later_floor,
        state: PrefixState::new(model),
        remaining_min_cost: (0..n)
            .filter(|&i| fixed[i].is_none_or(|p| p < tail_start))
            .map(|i| model.min_cost(i))
            .sum(),
        incumbent: incumbent.unwrap_or(f64::INFINITY),
        improved: None,
        aborted: false,
        stats: SearchStats::default(),
        memoize: n_free <= 64 && no_blocks,
        settled: HashMap::new(),
    };
    engine.dfs(domains, clock);
    engine.stats.elapsed_seconds = clock.elapsed();
    EngineResult { improved: engine.improved, exhausted: !engine.aborted, stats: engine.stats }
}

impl Engine<'_> {
    fn tolerance(&self) -> f64 {
        if self.incumbent.is_finite() {
            1e-9 * self.incumbent.abs().max(1.0)
        } else {
            0.0
        }
    }

    fn fail(&mut self) {
        self.stats.failures += 1;
        if self.limits.max_failures.is_some_and(|m| self.stats.failures >= m) {
            self.aborted = true;
        }
    }

    fn dfs(&mut self, mut doms: Domains, clock: &mut Clock) {
        self.stats.nodes += 1;
        clock.tick(1);
        if self.limits.max_nodes.is_some_and(|m| self.stats.nodes > m) || clock.expired(self.limits.deadline) {
            self.aborted = true;
            return;
        }
        if !self.propagate(&mut doms) {
            self.stats.pruned_by_propagation += 1;
            self.fail();
            return;
        }
        let pushed = self.advance(&doms);
        let key = self.prefix_key(&doms);
        let partial = self.state.partial_objective();
        if key.is_some_and(|(set, _)| self.settled.get(&set).is_some_and(|&best| partial >= best)) {
            // Same built set reached before at no higher cost.
            self.stats.pruned_by_bound += 1;
            self.fail();
        } else {
            self.expand(doms, clock);
            if let Some((set, false)) = key {
                if !self.aborted && self.settled.len() < SETTLED_CAP {
                    let best = self.settled.entry(set).or_insert(partial);
                    *best = best.min(partial);
                }
            }
        }
        for _ in 0..pushed {
            let i = self.state.pop(self.model).expect("pushed above");
            self.remaining_min_cost += self.model.min_cost(i);
        }
    }

    /// Built free indexes as a bit mask, and whether some unbuilt one is
    /// already tied to a later position. None when memoisation is off.
    fn prefix_key(&self, doms: &Domains) -> Option<(u64, bool)> {
        if !self.memoize {
            return None;
        }
        let mut set = 0u64;
        for &i in self.state.order() {
            if self.fixed_at[i].is_none() {
                set |= 1 << self.slot[i];
            }
        }
        let tied = (0..self.free.len()).any(|k| set & (1 << k) == 0 && doms[k].count_ones(..) == 1);
        Some((set, tied))
    }

    fn expand(&mut self, doms: Domains, clock: &mut Clock) {
        let p = self.state.len();
        if p == self.tail_start {
            let obj = self.state.partial_objective() + self.tail_objective;
            if obj < self.incumbent - self.tolerance() {
                self.incumbent = obj;
                let mut order = self.state.order().to_vec();
                order.extend((p..self.n).map(|q| self.owner[q].expect("pinned suffix")));
                self.improved = Some((order, obj));
                self.stats.record(clock.elapsed(), obj);
            } else {
                // The objective cut rejects this leaf.
                self.fail();
            }
            return;
        }
        // Next step costs at least the cheapest candidate for position p at
        // the current runtime. Later steps before the suffix run at least at
        // the suffix runtime, and are also bounded by `later_floor`.
        let next_min = self
            .free
            .iter()
            .enumerate()
            .filter(|&(k, _)| doms[k].contains(p))
            .map(|(_, &i)| self.model.min_cost(i))
            .fold(f64::INFINITY, f64::min);
        if next_min.is_finite() {
            let r_tail = self.tail_runtime;
            let r_now = self.state.current_runtime();
            let later = (r_tail * (self.remaining_min_cost - next_min)).max(self.later_floor[p + 1]);
            let bound = self.state.partial_objective() + r_now * next_min + later + self.tail_objective;
            if bound >= self.incumbent - self.tolerance() {
                self.stats.pruned_by_bound += 1;
                self.fail();
                return;
            }
        }
        let Some(k) = (0..self.free.len())
            .filter(|&k| doms[k].count_ones(..) > 1)
            .min_by_key(|&k| (doms[k].count_ones(..), self.tie_rank[self.free[k]]))
        else {
            return;
        };
        let values: Vec<usize> = doms[k].ones().collect();
        for v in values {
            let mut child = doms.clone();
            child[k].clear();
            child[k].insert(v);
            self.dfs(child, clock);
            if self.aborted {
                return;
            }
        }
    }

    /// Appends every index whose position is the next one. Returns how many.
    fn advance(&mut self, doms: &Domains) -> usize {
        let mut pushed = 0;
        while self.state.len() < self.tail_start {
            let p = self.state.len();
            let who = self.owner[p].or_else(|| {
                self.free
                    .iter()
                    .enumerate()
                    .find(|&(k, _)| doms[k].count_ones(..) == 1 && doms[k].contains(p))
                    .map(|(_, &i)| i)
            });
            let Some(i) = who else { break };
            self.state.push(self.model, i);
            self.remaining_min_cost -= self.model.min_cost(i);
            pushed += 1;
        }
        pushed
    }

    fn bounds(&self, doms: &Domains, i: usize) -> Option<(usize, usize)> {
        match self.fixed_at[i] {
            Some(p) => Some((p, p)),
            None => {
                let d = &doms[self.slot[i]];
                Some((d.minimum()?, d.maximum()?))
            }
        }
    }

    /// Narrows domains to a fixpoint. False when some domain empties.
    fn propagate(&self, doms: &mut Domains) -> bool {
        let m = self.free.len();
        loop {
            let mut changed = false;
            for k in 0..m {
                if doms[k].is_clear() {
                    return false;
                }
            }
            // Assigned variables take their position away from the others.
            for k in 0..m {
                if doms[k].count_ones(..) == 1 {
                    let p = doms[k].minimum().expect("non-empty");
                    for other in 0..m {
                        if other != k && doms[other].contains(p) {
                            doms[other].remove(p);
                            if doms[other].is_clear() {
                                return false;
                            }
                            changed = true;
                        }
                    }
                }
            }
            // A free position with a single candidate goes to it.
            for &p in &self.open {
                let mut holder = None;
                let mut count = 0;
                for k in 0..m {
                    if doms[k].contains(p) {
                        count += 1;
                        holder = Some(k);
                    }
                }
                match (count, holder) {
                    (0, _) => return false,
                    (1, Some(k)) if doms[k].count_ones(..) > 1 => {
                        doms[k].clear();
                        doms[k].insert(p);
                        changed = true;
                    }
                    _ => {}
                }
            }
            for &(a, b) in &self.edges {
                let (Some((lo_a, hi_a)), Some((lo_b, hi_b))) = (self.bounds(doms, a), self.bounds(doms, b)) else {
                    return false;
                };
                if lo_b <= lo_a {
                    if self.fixed_at[b].is_some() {
                        return false;
                    }
                    doms[self.slot[b]].set_range(..lo_a + 1, false);
                    changed = true;
                }
                if hi_a >= hi_b {
                    if self.fixed_at[a].is_some() {
                        return false;
                    }
                    doms[self.slot[a]].set_range(hi_b.., false);
                    changed = true;
                }
                if self.fixed_at[a].is_none() && doms[self.slot[a]].is_clear()
                    || self.fixed_at[b].is_none() && doms[self.slot[b]].is_clear()
                {
                    return false;
                }
            }
            for block in &self.blocks {
                let s = block.len();
                let mut lo_max = 0;
                let mut hi_min = usize::MAX;
                for &x in block {
                    let Some((lo, hi)) = self.bounds(doms, x) else { return false };
                    lo_max = lo_max.max(lo);
                    hi_min = hi_min.min(hi);
                }
                let lo_bound = lo_max.saturating_sub(s - 1);
                let hi_bound = hi_min.saturating_add(s - 1);
                for &x in block {
                    match self.fixed_at[x] {
                        Some(p) if p < lo_bound || p > hi_bound => return false,
                        Some(_) => {}
                        None => {
                            let d = &mut doms[self.slot[x]];
                            let before = d.count_ones(..);
                            d.set_range(..lo_bound, false);
                            if hi_bound + 1 < self.n {
                                d.set_range(hi_bound + 1.., false);
                            }
                            if d.is_clear() {
                                return false;
                            }
                            changed |= d.count_ones(..) != before;
                        }
                    }
                }
            }
            if changed {
                continue;
            }
            // Hall intervals are the costly rule; run them once the cheap
            // ones are quiet.
            match self.hall(doms) {
                None => return false,
                Some(true) => {}
                Some(false) => return true,
            }
        }
    }

    /// Hall intervals over position bounds: `c` variables confined to an
    /// interval holding `c` free positions own that interval.
    fn hall(&self, doms: &mut Domains) -> Option<bool> {
        let m = self.free.len();
        let spans: Vec<(usize, usize)> = doms
            .iter()
            .map(|d| (d.minimum().unwrap_or(0), d.maximum().unwrap_or(0)))
            .collect();
        let mut changed = false;
        let mut los: Vec<usize> = spans.iter().map(|s| s.0).collect();
        let mut his: Vec<usize> = spans.iter().map(|s| s.1).collect();
        los.sort_unstable();
        los.dedup();
        his.sort_unstable();
        his.dedup();
        for &a in &los {
            for &b in &his {
                if b < a {
                    continue;
                }
                let avail = self.free_before[b + 1] - self.free_before[a];
                let inside = spans.iter().filter(|s| s.0 >= a && s.1 <= b).count();
                if inside > avail {
                    return None;
                }
                if inside == avail && inside < m {
                    for k in 0..m {
                        let (lo, hi) = spans[k];
                        if lo >= a && hi <= b {
                            continue;
                        }
                        let d = &mut doms[k];
                        if d.ones().any(|p| p >= a && p <= b) {
                            d.set_range(a..b + 1, false);
                            if d.is_clear() {
                                return None;
                            }
                            changed = true;
                        }
                    }
                }
            }
        }
        Some(changed)
    }
}
