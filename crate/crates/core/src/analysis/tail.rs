//! Which indexes can end the deployment.
//!
//! The objective of the last `L` builds depends only on which indexes come
//! before them, not on their order. Among tails with the same index set the
//! cheapest (the champion) is always preferable, so any fact shared by the
//! champions of every set holds in some optimum.

use fixedbitset::FixedBitSet;

use crate::clock::Clock;
use crate::constraints::ConstraintSet;
use crate::eval::PrefixState;
use crate::model::Model;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TailFindings {
    /// `(before, after)` pairs.
    pub precedences: Vec<(usize, usize)>,
    /// `(index, lo, hi)` position restrictions.
    pub domains: Vec<(usize, usize, usize)>,
    /// Longest tail length that fit in the budget, if any.
    pub tail_length: Option<usize>,
}

/// Enumerates feasible tails of length 3, 4, ... while there are at most
/// `budget` of them, and reports the rules shared by all champions.
pub fn tail_analysis(model: &Model, cs: &ConstraintSet, budget: usize) -> TailFindings {
    tail_analysis_until(model, cs, budget, &mut Clock::wall(), None)
}

pub(crate) fn tail_analysis_until(
    model: &Model,
    cs: &ConstraintSet,
    budget: usize,
    clock: &mut Clock,
    deadline: Option<f64>,
) -> TailFindings {
    let n = model.num_indexes();
    let mut findings = TailFindings::default();
    if n == 0 {
        return findings;
    }
    let mut len = n.min(3);
    while len <= n {
        let Some(patterns) = enumerate(cs, len, budget, clock, deadline) else {
            break;
        };
        if patterns.is_empty() {
            break;
        }
        let champions = champions(model, &patterns, clock);
        derive_rules(cs, len, &champions, &mut findings);
        findings.tail_length = Some(len);
        len += 1;
    }
    findings
}

struct Enumeration<'a> {
    cs: &'a ConstraintSet,
    n: usize,
    first: usize,
    budget: usize,
    placed: FixedBitSet,
    rev: Vec<usize>,
    out: Vec<Vec<usize>>,
    aborted: bool,
}

fn enumerate(
    cs: &ConstraintSet,
    len: usize,
    budget: usize,
    clock: &mut Clock,
    deadline: Option<f64>,
) -> Option<Vec<Vec<usize>>> {
    let n = cs.len();
    let mut e = Enumeration {
        cs,
        n,
        first: n - len,
        budget,
        placed: FixedBitSet::with_capacity(n),
        rev: Vec::with_capacity(len),
        out: Vec::new(),
        aborted: false,
    };
    e.fill(n - 1, clock, deadline);
    (!e.aborted).then_some(e.out)
}

impl Enumeration<'_> {
    /// Fills position `pos` and below, down to `first`.
    fn fill(&mut self, pos: usize, clock: &mut Clock, deadline: Option<f64>) {
        if self.aborted {
            return;
        }
        clock.tick(1);
        if clock.expired(deadline) {
            self.aborted = true;
            return;
        }
        let done = self.rev.len() == self.n - self.first;
        // Anything that cannot go below the next open position is stranded.
        let next_open = if done { self.first } else { pos + 1 };
        if (0..self.n).any(|y| !self.placed.contains(y) && self.cs.domain(y).0 >= next_open) {
            return;
        }
        if done {
            if self.blocks_ok() {
                let mut pattern = self.rev.clone();
                pattern.reverse();
                self.out.push(pattern);
                if self.out.len() > self.budget {
                    self.aborted = true;
                }
            }
            return;
        }
        for x in 0..self.n {
            if self.placed.contains(x) {
                continue;
            }
            let (lo, hi) = self.cs.domain(x);
            if pos < lo || pos > hi || !self.cs.descendants(x).is_subset(&self.placed) {
                continue;
            }
            self.placed.insert(x);
            self.rev.push(x);
            self.fill(pos.wrapping_sub(1), clock, deadline);
            self.rev.pop();
            self.placed.remove(x);
            if self.aborted {
                return;
            }
        }
    }

    fn blocks_ok(&self) -> bool {
        let len = self.rev.len();
        // rev[0] is the last position; tail slot t sits at rev[len - 1 - t].
        let slot = |x: usize| self.rev.iter().position(|&y| y == x).map(|r| len - 1 - r);
        for block in self.cs.blocks() {
            let slots: Vec<usize> = block.iter().filter_map(|&m| slot(m)).collect();
            if slots.is_empty() {
                continue;
            }
            let max = *slots.iter().max().expect("non-empty");
            let min = *slots.iter().min().expect("non-empty");
            if max - min + 1 != slots.len() {
                return false;
            }
            if slots.len() < block.len() && min != 0 {
                return false;
            }
        }
        true
    }
}

/// Champions of every index-set group, ties included.
fn champions(model: &Model, patterns: &[Vec<usize>], clock: &mut Clock) -> Vec<Vec<usize>> {
    let n = model.num_indexes();
    let mut keyed: Vec<(Vec<usize>, usize)> = patterns
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut set = p.clone();
            set.sort_unstable();
            (set, k)
        })
        .collect();
    keyed.sort();
    let mut out = Vec::new();
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start;
        while end < keyed.len() && keyed[end].0 == keyed[start].0 {
            end += 1;
        }
        let set = &keyed[start].0;
        let preceding: Vec<usize> = (0..n).filter(|x| set.binary_search(x).is_err()).collect();
        let mut state = PrefixState::from_prefix(model, &preceding);
        clock.tick(n as u64);
        let scored: Vec<(f64, usize)> = keyed[start..end]
            .iter()
            .map(|&(_, k)| (state.probe(model, patterns[k].iter().copied()), k))
            .collect();
        let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * best.abs().max(1.0);
        out.extend(scored.iter().filter(|s| s.0 <= best + tol).map(|s| patterns[s.1].clone()));
        start = end;
    }
    out
}

fn derive_rules(cs: &ConstraintSet, len: usize, champions: &[Vec<usize>], out: &mut TailFindings) {
    let n = cs.len();
    let first = n - len;
    let mut pos = vec![vec![None; n]; champions.len()];
    for (c, pattern) in champions.iter().enumerate() {
        for (slot, &x) in pattern.iter().enumerate() {
            pos[c][x] = Some(first + slot);
        }
    }
    for x in 0..n {
        let (lo, hi) = cs.domain(x);
        let new_hi = pos
            .iter()
            .map(|p| p[x].unwrap_or(first.saturating_sub(1)))
            .max()
            .unwrap_or(hi);
        let new_lo = pos.iter().map(|p| p[x].unwrap_or(lo)).min().unwrap_or(lo);
        if new_lo > lo || new_hi < hi {
            out.domains.push((x, new_lo.max(lo), new_hi.min(hi)));
        }
    }
    for y in 0..n {
        if !pos.iter().all(|p| p[y].is_some()) {
            continue;
        }
        for x in 0..n {
            if x == y || cs.precedes(x, y) || out.precedences.contains(&(x, y)) {
                continue;
            }
            if pos.iter().all(|p| p[x].is_none_or(|px| px < p[y].expect("checked"))) {
                out.precedences.push((x, y));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixtures, Instance};

    #[test]
    fn compete_fixes_cheap_weak_index_last() {
        // [1, 0] beats [0, 1]: index 0 is last in the only champion.
        let m = Model::new(&fixtures::compete()).unwrap();
        let cs = ConstraintSet::from_model(&m);
        let f = tail_analysis(&m, &cs, 50_000);
        assert_eq!(f.tail_length, Some(2));
        assert_eq!(f.precedences, vec![(1, 0)]);
    }

    #[test]
    fn ties_give_nothing() {
        let m = Model::new(&fixtures::alliance()).unwrap();
        let f = tail_analysis(&m, &ConstraintSet::from_model(&m), 50_000);
        assert!(f.precedences.is_empty());
        assert!(f.domains.is_empty());
    }

    #[test]
    fn budget_exhaustion_is_a_no_op() {
        let text = r#"{"name":"x","indexes":[{"id":0,"ctime":1},{"id":1,"ctime":2},{"id":2,"ctime":3},{"id":3,"ctime":4}],
          "queries":[{"id":0,"qtime":10}],
          "plans":[{"id":0,"query":0,"indexes":[0],"qspdup":1}]}"#;
        let m = Model::new(&Instance::from_json_checked(text).unwrap()).unwrap();
        let f = tail_analysis(&m, &ConstraintSet::from_model(&m), 5);
        assert_eq!(f, TailFindings::default());
    }
}
