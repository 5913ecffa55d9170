//! Ordering knowledge about a deployment: precedence pairs, blocks of
//! indexes that must be built consecutively, and per-index position domains.
//!
//! Positions are zero-based throughout: position `0` is built first.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::IndexId;
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    n: usize,
    precedences: BTreeSet<(usize, usize)>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<Option<usize>>,
    lo: Vec<usize>,
    hi: Vec<usize>,
    reach: Vec<FixedBitSet>,
    back: Vec<FixedBitSet>,
    acyclic: bool,
}

impl ConstraintSet {
    /// No constraint at all over `n` indexes.
    pub fn unconstrained(n: usize) -> Self {
        Self {
            n,
            precedences: BTreeSet::new(),
            blocks: Vec::new(),
            block_of: vec![None; n],
            lo: vec![0; n],
            hi: vec![n.saturating_sub(1); n],
            reach: vec![FixedBitSet::with_capacity(n); n],
            back: vec![FixedBitSet::with_capacity(n); n],
            acyclic: true,
        }
    }

    /// Seeded with the instance's hard precedences, domains tightened.
    pub fn from_model(model: &Model) -> Self {
        let mut cs = Self::unconstrained(model.num_indexes());
        for i in 0..model.num_indexes() {
            for &s in model.succs(i) {
                cs.add_precedence(i, s);
            }
        }
        cs.tighten_domains();
        cs
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclic
    }

    pub fn precedence_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.precedences.iter().copied()
    }

    pub fn num_precedences(&self) -> usize {
        self.precedences.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> Option<&[usize]> {
        self.block_of[i].map(|b| self.blocks[b].as_slice())
    }

    /// Inclusive position interval of `i`.
    pub fn domain(&self, i: usize) -> (usize, usize) {
        (self.lo[i], self.hi[i])
    }

    pub fn fixed_position(&self, i: usize) -> Option<usize> {
        (self.lo[i] == self.hi[i]).then_some(self.lo[i])
    }

    /// True when `a` must precede `b` (transitively).
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.reach[a].contains(b)
    }

    /// Every index that must come after `i`.
    pub fn descendants(&self, i: usize) -> &FixedBitSet {
        &self.reach[i]
    }

    /// Every index that must come before `i`.
    pub fn ancestors(&self, i: usize) -> &FixedBitSet {
        &self.back[i]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.precedes(a, b) || self.precedes(b, a)
    }

    /// Records `before < after`. Returns true when this adds information.
    /// A pair that would close a cycle is recorded and flips the set to cyclic.
    pub fn add_precedence(&mut self, before: usize, after: usize) -> bool {
        if before == after || self.precedes(before, after) {
            return false;
        }
        self.precedences.insert((before, after));
        if self.precedes(after, before) {
            self.acyclic = false;
        }
        // Everything reaching `before` (and `before` itself) now reaches
        // everything reachable from `after` (and `after` itself).
        let mut down = self.reach[after].clone();
        down.insert(after);
        let mut up = self.back[before].clone();
        up.insert(before);
        for u in up.ones() {
            self.reach[u].union_with(&down);
        }
        for d in down.ones() {
            self.back[d].union_with(&up);
        }
        if !self.acyclic {
            for v in 0..self.n {
                self.reach[v].remove(v);
                self.back[v].remove(v);
            }
        }
        true
    }

    /// Registers a block of indexes that must occupy consecutive positions.
    /// Members already in a block are rejected.
    pub fn add_block(&mut self, members: &[usize]) -> bool {
        if members.len() < 2 || members.iter().any(|&m| self.block_of[m].is_some()) {
            return false;
        }
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let id = self.blocks.len();
        for &m in &sorted {
            self.block_of[m] = Some(id);
        }
        self.blocks.push(sorted);
        true
    }

    /// Intersects the domain of `i` with `[lo, hi]`. Returns true on change.
    pub fn restrict_domain(&mut self, i: usize, lo: usize, hi: usize) -> bool {
        let (old_lo, old_hi) = (self.lo[i], self.hi[i]);
        self.lo[i] = self.lo[i].max(lo);
        self.hi[i] = self.hi[i].min(hi);
        (self.lo[i], self.hi[i]) != (old_lo, old_hi)
    }

    /// Propagates precedences and blocks into the position intervals until
    /// nothing changes. Returns false when some domain becomes empty.
    pub fn tighten_domains(&mut self) -> bool {
        if !self.acyclic {
            return false;
        }
        let n = self.n;
        for i in 0..n {
            let anc = self.back[i].count_ones(..);
            let desc = self.reach[i].count_ones(..);
            self.lo[i] = self.lo[i].max(anc);
            self.hi[i] = self.hi[i].min((n - 1).saturating_sub(desc));
        }
        loop {
            let mut changed = false;
            for &(a, b) in &self.precedences {
                if self.lo[b] < self.lo[a] + 1 {
                    self.lo[b] = self.lo[a] + 1;
                    changed = true;
                }
                if self.hi[b] >= 1 && self.hi[a] > self.hi[b] - 1 {
                    self.hi[a] = self.hi[b] - 1;
                    changed = true;
                }
            }
            for block in &self.blocks {
                let s = block.len();
                let lo_max = block.iter().map(|&m| self.lo[m]).max().unwrap_or(0);
                let hi_min = block.iter().map(|&m| self.hi[m]).min().unwrap_or(0);
                let lo_bound = lo_max.saturating_sub(s - 1);
                let hi_bound = hi_min + s - 1;
                for &m in block {
                    if self.lo[m] < lo_bound {
                        self.lo[m] = lo_bound;
                        changed = true;
                    }
                    if self.hi[m] > hi_bound {
                        self.hi[m] = hi_bound;
                        changed = true;
                    }
                }
            }
            if (0..n).any(|i| self.lo[i] > self.hi[i]) {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    /// Checks a complete order against every constraint.
    pub fn check(&self, order: &[usize]) -> std::result::Result<(), String> {
        if order.len() != self.n {
            return Err(format!("order has {} entries, expected {}", order.len(), self.n));
        }
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        for &(a, b) in &self.precedences {
            if pos[a] >= pos[b] {
                return Err(format!("index {a} must precede index {b}"));
            }
        }
        for block in &self.blocks {
            let min = block.iter().map(|&m| pos[m]).min().unwrap_or(0);
            let max = block.iter().map(|&m| pos[m]).max().unwrap_or(0);
            if max - min + 1 != block.len() {
                return Err(format!("block {block:?} is not consecutive"));
            }
        }
        for i in 0..self.n {
            if pos[i] < self.lo[i] || pos[i] > self.hi[i] {
                return Err(format!(
                    "index {i} at position {} outside [{}, {}]",
                    pos[i], self.lo[i], self.hi[i]
                ));
            }
        }
        Ok(())
    }

    /// Closest feasible order to `order`: positions are filled left to right
    /// with the earliest (in `order`) index that keeps the partial order
    /// completable. Backtracks when a choice dead-ends.
    pub fn repair(&self, order: &[usize]) -> Option<Vec<usize>> {
        if !self.acyclic {
            return None;
        }
        if self.check(order).is_ok() {
            return Some(order.to_vec());
        }
        let mut rank = vec![usize::MAX; self.n];
        for (k, &i) in order.iter().enumerate() {
            rank[i] = k;
        }
        let mut candidates: Vec<usize> = (0..self.n).collect();
        candidates.sort_by_key(|&i| (rank[i], i));
        let mut placed = vec![false; self.n];
        let mut out = Vec::with_capacity(self.n);
        let mut budget = 200_000usize;
        if self.repair_dfs(&candidates, &mut placed, &mut out, &mut budget) {
            Some(out)
        } else {
            None
        }
    }

    fn repair_dfs(
        &self,
        candidates: &[usize],
        placed: &mut [bool],
        out: &mut Vec<usize>,
        budget: &mut usize,
    ) -> bool {
        let p = out.len();
        if p == self.n {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        // Some unplaced index must be placed by now.
        if (0..self.n).any(|i| !placed[i] && self.hi[i] < p) {
            return false;
        }
        // An open block must be continued.
        let open_block = out.last().and_then(|&last| {
            self.block_of[last].filter(|&b| self.blocks[b].iter().any(|&m| !placed[m]))
        });
        for &i in candidates {
            if placed[i] || self.lo[i] > p || self.hi[i] < p {
                continue;
            }
            if let Some(b) = open_block {
                if self.block_of[i] != Some(b) {
                    continue;
                }
            }
            if self.back[i].ones().any(|a| !placed[a]) {
                continue;
            }
            if let Some(b) = self.block_of[i] {
                let started = self.blocks[b].iter().any(|&m| placed[m]);
                if !started && p + self.blocks[b].len() > self.n {
                    continue;
                }
            }
            placed[i] = true;
            out.push(i);
            if self.repair_dfs(candidates, placed, out, budget) {
                return true;
            }
            out.pop();
            placed[i] = false;
        }
        false
    }

    /// Restriction to the indexes in `keep` (old ids), renumbered densely in
    /// the given order. Positions are unchanged and clamped to the new size,
    /// which is only meaningful when the dropped indexes occupy the last
    /// positions.
    pub fn restrict(&self, keep: &[usize]) -> ConstraintSet {
        let mut new_id = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            new_id[i] = k;
        }
        let m = keep.len();
        let mut cs = ConstraintSet::unconstrained(m);
        for &(a, b) in &self.precedences {
            if new_id[a] != usize::MAX && new_id[b] != usize::MAX {
                cs.add_precedence(new_id[a], new_id[b]);
            }
        }
        for (k, &i) in keep.iter().enumerate() {
            cs.lo[k] = self.lo[i];
            cs.hi[k] = self.hi[i].min(m.saturating_sub(1));
        }
        for block in &self.blocks {
            let kept: Vec<usize> = block
                .iter()
                .filter(|&&b| new_id[b] != usize::MAX)
                .map(|&b| new_id[b])
                .collect();
            if kept.len() == block.len() {
                cs.add_block(&kept);
            } else if !kept.is_empty() {
                // The dropped members sit at the very end, so the rest of
                // the block must immediately precede them.
                let start = m - kept.len();
                for &k in &kept {
                    cs.lo[k] = cs.lo[k].max(start);
                }
                if kept.len() > 1 {
                    cs.add_block(&kept);
                }
            }
        }
        cs
    }

    /// Serializable snapshot.
    pub fn to_data(&self) -> ConstraintData {
        ConstraintData {
            precedence_pairs: self
                .precedences
                .iter()
                .map(|&(a, b)| (IndexId::from(a), IndexId::from(b)))
                .collect(),
            adjacency_blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|&m| IndexId::from(m)).collect())
                .collect(),
            fixed_positions: (0..self.n)
                .filter_map(|i| self.fixed_position(i).map(|p| (IndexId::from(i), p)))
                .collect(),
            position_domains: (0..self.n).map(|i| (self.lo[i], self.hi[i])).collect(),
        }
    }

    /// Rebuilds a constraint set over `n` indexes from its snapshot.
    pub fn from_data(n: usize, data: &ConstraintData) -> Result<ConstraintSet> {
        let check = |i: IndexId| -> Result<usize> {
            if i.index() < n {
                Ok(i.index())
            } else {
                Err(Error::UnknownIndex(i.index()))
            }
        };
        let mut cs = ConstraintSet::unconstrained(n);
        for &(a, b) in &data.precedence_pairs {
            cs.add_precedence(check(a)?, check(b)?);
        }
        for block in &data.adjacency_blocks {
            let members = block.iter().map(|&m| check(m)).collect::<Result<Vec<_>>>()?;
            cs.add_block(&members);
        }
        for &(i, p) in &data.fixed_positions {
            let i = check(i)?;
            cs.restrict_domain(i, p, p);
        }
        if data.position_domains.len() == n {
            for (i, &(lo, hi)) in data.position_domains.iter().enumerate() {
                cs.restrict_domain(i, lo, hi);
            }
        }
        if !cs.is_acyclic() {
            return Err(Error::CyclicConstraints);
        }
        cs.tighten_domains();
        Ok(cs)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintData {
    pub precedence_pairs: Vec<(IndexId, IndexId)>,
    pub adjacency_blocks: Vec<Vec<IndexId>>,
    pub fixed_positions: Vec<(IndexId, usize)>,
    pub position_domains: Vec<(usize, usize)>,
}
