//! Problem data: indexes, queries, plans, build interactions and hard
//! precedences, plus validation, canonicalization and the JSON file format.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for every floating comparison on seconds.
pub const TIME_EPS: f64 = 1e-9;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            #[inline]
            fn from(v: usize) -> Self {
                Self(v as u32)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

dense_id!(
    /// Identifier of an index; dense in `[0, |I|)` once canonical.
    IndexId
);
dense_id!(
    /// Identifier of a query; dense in `[0, |Q|)` once canonical.
    QueryId
);
dense_id!(
    /// Identifier of a query plan; dense in `[0, |P|)` once canonical.
    PlanId
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexDef {
    pub id: IndexId,
    /// Creation cost in seconds when no helper index exists.
    pub ctime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryDef {
    pub id: QueryId,
    /// Runtime in seconds without any index.
    pub qtime: f64,
}

/// A plan of one query that becomes usable once every index in `indexes` exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDef {
    pub id: PlanId,
    pub query: QueryId,
    pub indexes: Vec<IndexId>,
    /// Speedup over the original query runtime, in seconds.
    pub qspdup: f64,
}

/// `helper`, once built, makes building `target` cheaper by `cspdup` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildInteraction {
    pub target: IndexId,
    pub helper: IndexId,
    pub cspdup: f64,
}

/// Hard ordering requirement: `before` must be built earlier than `after`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Precedence {
    pub before: IndexId,
    pub after: IndexId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub name: String,
    pub indexes: Vec<IndexDef>,
    pub queries: Vec<QueryDef>,
    pub plans: Vec<PlanDef>,
    #[serde(default)]
    pub build_interactions: Vec<BuildInteraction>,
    #[serde(default)]
    pub precedences: Vec<Precedence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DuplicateIndexId,
    DuplicateQueryId,
    DuplicatePlanId,
    NonDenseId,
    NonpositiveCtime,
    NegativeQtime,
    NonFiniteValue,
    EmptyPlan,
    DanglingQuery,
    DanglingIndex,
    RepeatedPlanIndex,
    NegativeQspdup,
    QspdupGtQtime,
    DuplicatePlan,
    SelfInteraction,
    NonpositiveCspdup,
    CspdupGeCtime,
    SelfPrecedence,
    PrecedenceCycle,
}

/// One invariant violation. Exactly one of the subject fields is usually set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<IndexId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub query: Option<QueryId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub plan: Option<PlanId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<(IndexId, IndexId)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub cycle: Vec<IndexId>,
}

impl Violation {
    fn new(code: ViolationCode) -> Self {
        Self {
            code,
            index: None,
            query: None,
            plan: None,
            pair: None,
            cycle: Vec::new(),
        }
    }

    fn at_index(code: ViolationCode, id: IndexId) -> Self {
        Self {
            index: Some(id),
            ..Self::new(code)
        }
    }

    fn at_query(code: ViolationCode, id: QueryId) -> Self {
        Self {
            query: Some(id),
            ..Self::new(code)
        }
    }

    fn at_plan(code: ViolationCode, id: PlanId) -> Self {
        Self {
            plan: Some(id),
            ..Self::new(code)
        }
    }

    fn at_pair(code: ViolationCode, a: IndexId, b: IndexId) -> Self {
        Self {
            pair: Some((a, b)),
            ..Self::new(code)
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.code)?;
        if let Some(i) = self.index {
            write!(f, " at index {i}")?;
        }
        if let Some(q) = self.query {
            write!(f, " at query {q}")?;
        }
        if let Some(p) = self.plan {
            write!(f, " at plan {p}")?;
        }
        if let Some((a, b)) = self.pair {
            write!(f, " at ({a}, {b})")?;
        }
        if !self.cycle.is_empty() {
            let ids: Vec<String> = self.cycle.iter().map(|i| i.to_string()).collect();
            write!(f, " through [{}]", ids.join(", "))?;
        }
        Ok(())
    }
}

/// Every invariant violation found; empty means the instance is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn contains(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl Instance {
    pub fn num_indexes(&self) -> usize {
        self.indexes.len()
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn num_plans(&self) -> usize {
        self.plans.len()
    }

    /// Checks every data invariant and returns all violations.
    ///
    /// A violation whose cause is another invalid field (for example a
    /// speedup compared against a non-positive creation cost) is not
    /// reported twice: only the root field is flagged.
    pub fn validate(&self) -> ValidationReport {
        use ViolationCode::*;
        let mut out = Vec::new();

        let mut ctime: HashMap<IndexId, f64> = HashMap::new();
        for def in &self.indexes {
            if ctime.insert(def.id, def.ctime).is_some() {
                out.push(Violation::at_index(DuplicateIndexId, def.id));
            }
            if def.ctime.is_infinite() {
                out.push(Violation::at_index(NonFiniteValue, def.id));
            } else if !(def.ctime > 0.0) {
                out.push(Violation::at_index(NonpositiveCtime, def.id));
            }
        }
        let valid_ctime = |id: IndexId| -> Option<f64> {
            ctime
                .get(&id)
                .copied()
                .filter(|c| c.is_finite() && *c > 0.0)
        };

        let mut qtime: HashMap<QueryId, f64> = HashMap::new();
        for def in &self.queries {
            if qtime.insert(def.id, def.qtime).is_some() {
                out.push(Violation::at_query(DuplicateQueryId, def.id));
            }
            if def.qtime.is_infinite() {
                out.push(Violation::at_query(NonFiniteValue, def.id));
            } else if !(def.qtime >= 0.0) {
                out.push(Violation::at_query(NegativeQtime, def.id));
            }
        }

        if !is_dense(self.indexes.iter().map(|d| d.id.0))
            || !is_dense(self.queries.iter().map(|d| d.id.0))
            || !is_dense(self.plans.iter().map(|d| d.id.0))
        {
            out.push(Violation::new(NonDenseId));
        }

        let mut plan_ids = BTreeSet::new();
        let mut plan_sets: BTreeMap<(QueryId, Vec<IndexId>), PlanId> = BTreeMap::new();
        for plan in &self.plans {
            if !plan_ids.insert(plan.id) {
                out.push(Violation::at_plan(DuplicatePlanId, plan.id));
            }
            let owner = qtime.get(&plan.query).copied();
            if owner.is_none() {
                out.push(Violation::at_plan(DanglingQuery, plan.id));
            }
            if plan.indexes.is_empty() {
                out.push(Violation::at_plan(EmptyPlan, plan.id));
            }
            let mut seen = BTreeSet::new();
            for &i in &plan.indexes {
                if !ctime.contains_key(&i) {
                    out.push(Violation {
                        plan: Some(plan.id),
                        index: Some(i),
                        ..Violation::new(DanglingIndex)
                    });
                } else if !seen.insert(i) {
                    out.push(Violation {
                        plan: Some(plan.id),
                        index: Some(i),
                        ..Violation::new(RepeatedPlanIndex)
                    });
                }
            }
            if plan.qspdup.is_infinite() {
                out.push(Violation::at_plan(NonFiniteValue, plan.id));
            } else if !(plan.qspdup >= 0.0) {
                out.push(Violation::at_plan(NegativeQspdup, plan.id));
            } else if let Some(q) = owner.filter(|q| q.is_finite() && *q >= 0.0) {
                if plan.qspdup > q + TIME_EPS {
                    out.push(Violation::at_plan(QspdupGtQtime, plan.id));
                }
            }
            if !plan.indexes.is_empty() {
                let key = (plan.query, seen.into_iter().collect::<Vec<_>>());
                if plan_sets.insert(key, plan.id).is_some() {
                    out.push(Violation::at_plan(DuplicatePlan, plan.id));
                }
            }
        }

        for bi in &self.build_interactions {
            let dangling = [bi.target, bi.helper]
                .into_iter()
                .filter(|i| !ctime.contains_key(i))
                .count();
            if dangling > 0 {
                out.push(Violation::at_pair(DanglingIndex, bi.target, bi.helper));
                continue;
            }
            if bi.target == bi.helper {
                out.push(Violation::at_pair(SelfInteraction, bi.target, bi.helper));
                continue;
            }
            if bi.cspdup.is_infinite() {
                out.push(Violation::at_pair(NonFiniteValue, bi.target, bi.helper));
            } else if !(bi.cspdup > 0.0) {
                out.push(Violation::at_pair(NonpositiveCspdup, bi.target, bi.helper));
            } else if let Some(c) = valid_ctime(bi.target) {
                if bi.cspdup >= c - TIME_EPS {
                    out.push(Violation::at_pair(CspdupGeCtime, bi.target, bi.helper));
                }
            }
        }

        let mut edges: BTreeSet<(IndexId, IndexId)> = BTreeSet::new();
        for p in &self.precedences {
            if !ctime.contains_key(&p.before) || !ctime.contains_key(&p.after) {
                out.push(Violation::at_pair(DanglingIndex, p.before, p.after));
            } else if p.before == p.after {
                out.push(Violation::at_pair(SelfPrecedence, p.before, p.after));
            } else {
                edges.insert((p.before, p.after));
            }
        }
        for cycle in precedence_cycles(&edges) {
            out.push(Violation {
                cycle,
                ..Violation::new(PrecedenceCycle)
            });
        }

        ValidationReport { violations: out }
    }

    /// Returns the canonical form: identifiers re-densified in id order,
    /// duplicate plans and build interactions merged keeping the larger
    /// speedup, and every list sorted deterministically.
    ///
    /// References that do not resolve are dropped; callers are expected to
    /// validate references first (as [`Instance::load`] does).
    pub fn canonicalize(&self) -> Instance {
        let mut index_ids: Vec<IndexId> = self.indexes.iter().map(|d| d.id).collect();
        index_ids.sort();
        index_ids.dedup();
        let index_map: HashMap<IndexId, IndexId> = index_ids
            .iter()
            .enumerate()
            .map(|(k, &id)| (id, IndexId::from(k)))
            .collect();
        let mut query_ids: Vec<QueryId> = self.queries.iter().map(|d| d.id).collect();
        query_ids.sort();
        query_ids.dedup();
        let query_map: HashMap<QueryId, QueryId> = query_ids
            .iter()
            .enumerate()
            .map(|(k, &id)| (id, QueryId::from(k)))
            .collect();

        let mut indexes: BTreeMap<IndexId, f64> = BTreeMap::new();
        for d in &self.indexes {
            indexes.entry(index_map[&d.id]).or_insert(d.ctime);
        }
        let mut queries: BTreeMap<QueryId, f64> = BTreeMap::new();
        for d in &self.queries {
            queries.entry(query_map[&d.id]).or_insert(d.qtime);
        }

        let mut plans: BTreeMap<(QueryId, Vec<IndexId>), f64> = BTreeMap::new();
        for p in &self.plans {
            let Some(&q) = query_map.get(&p.query) else {
                continue;
            };
            let mut set: Vec<IndexId> = Vec::with_capacity(p.indexes.len());
            let mut ok = true;
            for i in &p.indexes {
                match index_map.get(i) {
                    Some(&m) => set.push(m),
                    None => ok = false,
                }
            }
            set.sort();
            set.dedup();
            if !ok || set.is_empty() {
                continue;
            }
            let entry = plans.entry((q, set)).or_insert(p.qspdup);
            if p.qspdup > *entry {
                *entry = p.qspdup;
            }
        }

        let mut builds: BTreeMap<(IndexId, IndexId), f64> = BTreeMap::new();
        for bi in &self.build_interactions {
            let (Some(&t), Some(&h)) = (index_map.get(&bi.target), index_map.get(&bi.helper)) else {
                continue;
            };
            let entry = builds.entry((t, h)).or_insert(bi.cspdup);
            if bi.cspdup > *entry {
                *entry = bi.cspdup;
            }
        }

        let mut precedences: BTreeSet<Precedence> = BTreeSet::new();
        for p in &self.precedences {
            if let (Some(&b), Some(&a)) = (index_map.get(&p.before), index_map.get(&p.after)) {
                precedences.insert(Precedence {
                    before: b,
                    after: a,
                });
            }
        }

        Instance {
            name: self.name.clone(),
            indexes: indexes
                .into_iter()
                .map(|(id, ctime)| IndexDef { id, ctime })
                .collect(),
            queries: queries
                .into_iter()
                .map(|(id, qtime)| QueryDef { id, qtime })
                .collect(),
            plans: plans
                .into_iter()
                .enumerate()
                .map(|(k, ((query, indexes), qspdup))| PlanDef {
                    id: PlanId::from(k),
                    query,
                    indexes,
                    qspdup,
                })
                .collect(),
            build_interactions: builds
                .into_iter()
                .map(|((target, helper), cspdup)| BuildInteraction {
                    target,
                    helper,
                    cspdup,
                })
                .collect(),
            precedences: precedences.into_iter().collect(),
        }
    }

    /// Parses an instance document without validating it.
    pub fn from_json_str(text: &str) -> Result<Instance> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Parses, checks references, canonicalizes and validates.
    pub fn from_json_checked(text: &str) -> Result<Instance> {
        let raw = Self::from_json_str(text)?;
        // Duplicate plans and sparse ids are repaired by canonicalization.
        let mut pre = raw.validate();
        pre.violations.retain(|v| {
            !matches!(v.code, ViolationCode::DuplicatePlan | ViolationCode::NonDenseId)
        });
        if let Some(v) = pre
            .violations
            .iter()
            .find(|v| matches!(v.code, ViolationCode::DanglingIndex | ViolationCode::DanglingQuery))
        {
            return Err(Error::DanglingReference(v.to_string()));
        }
        if !pre.is_empty() {
            return Err(Error::Invalid(pre));
        }
        let canonical = raw.canonicalize();
        let report = canonical.validate();
        if !report.is_empty() {
            return Err(Error::Invalid(report));
        }
        Ok(canonical)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json_checked(&text)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json_string();
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

fn is_dense(ids: impl Iterator<Item = u32>) -> bool {
    let mut v: Vec<u32> = ids.collect();
    v.sort_unstable();
    v.iter().enumerate().all(|(k, &id)| id as usize == k)
}

/// One cycle witness per strongly connected component with more than one node.
fn precedence_cycles(edges: &BTreeSet<(IndexId, IndexId)>) -> Vec<Vec<IndexId>> {
    let mut adj: BTreeMap<IndexId, Vec<IndexId>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default();
    }
    let nodes: Vec<IndexId> = adj.keys().copied().collect();
    let pos: HashMap<IndexId, usize> = nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let succ: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| adj[n].iter().map(|m| pos[m]).collect())
        .collect();
    let comps = crate::graph::strongly_connected_components(&succ);
    comps
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|mut c| {
            c.sort_unstable();
            c.into_iter().map(|k| nodes[k]).collect()
        })
        .collect()
}

/// The small worked instances used throughout the tests and docs.
pub mod fixtures {
    use super::*;

    fn build(
        name: &str,
        ctimes: &[f64],
        qtimes: &[f64],
        plans: &[(usize, &[usize], f64)],
        builds: &[(usize, usize, f64)],
    ) -> Instance {
        Instance {
            name: name.to_string(),
            indexes: ctimes
                .iter()
                .enumerate()
                .map(|(k, &ctime)| IndexDef {
                    id: IndexId::from(k),
                    ctime,
                })
                .collect(),
            queries: qtimes
                .iter()
                .enumerate()
                .map(|(k, &qtime)| QueryDef {
                    id: QueryId::from(k),
                    qtime,
                })
                .collect(),
            plans: plans
                .iter()
                .enumerate()
                .map(|(k, (q, set, s))| PlanDef {
                    id: PlanId::from(k),
                    query: QueryId::from(*q),
                    indexes: set.iter().map(|&i| IndexId::from(i)).collect(),
                    qspdup: *s,
                })
                .collect(),
            build_interactions: builds
                .iter()
                .map(|&(t, h, c)| BuildInteraction {
                    target: IndexId::from(t),
                    helper: IndexId::from(h),
                    cspdup: c,
                })
                .collect(),
            precedences: Vec::new(),
        }
        .canonicalize()
    }

    /// Two competing single-index plans for one query (speedups 5 and 20).
    pub fn compete() -> Instance {
        build(
            "FIX-COMPETE",
            &[10.0, 30.0],
            &[100.0],
            &[(0, &[0], 5.0), (0, &[1], 20.0)],
            &[],
        )
    }

    /// [`compete`] plus a build interaction: index 1 speeds up index 0 by 6 s.
    pub fn build_interaction() -> Instance {
        let mut inst = build(
            "FIX-BUILD",
            &[10.0, 30.0],
            &[100.0],
            &[(0, &[0], 5.0), (0, &[1], 20.0)],
            &[(0, 1, 6.0)],
        );
        inst.name = "FIX-BUILD".into();
        inst
    }

    /// Two indexes usable only together.
    pub fn alliance() -> Instance {
        build("FIX-ALLIANCE", &[10.0, 10.0], &[100.0], &[(0, &[0, 1], 50.0)], &[])
    }

    /// Index 0 (best case 1 + 3 s) is dominated by index 1 (always 5 s).
    pub fn dominated() -> Instance {
        build(
            "FIX-DOM",
            &[10.0, 10.0, 10.0],
            &[10.0, 10.0, 10.0],
            &[(0, &[0], 1.0), (1, &[0, 2], 3.0), (2, &[1], 5.0)],
            &[],
        )
    }

    /// One index, one query: the objective is a single rectangle.
    pub fn single() -> Instance {
        build("FIX-SINGLE", &[10.0], &[100.0], &[(0, &[0], 40.0)], &[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid_and_canonical() {
        for inst in [
            fixtures::compete(),
            fixtures::build_interaction(),
            fixtures::alliance(),
            fixtures::dominated(),
            fixtures::single(),
        ] {
            assert!(inst.validate().is_empty(), "{}: {}", inst.name, inst.validate());
            assert_eq!(inst.canonicalize(), inst);
        }
    }

    #[test]
    fn zero_ctime_is_flagged() {
        let mut inst = fixtures::compete();
        inst.indexes[0].ctime = 0.0;
        let report = inst.validate();
        assert_eq!(report.codes(), vec![ViolationCode::NonpositiveCtime]);
        assert_eq!(report.violations[0].index, Some(IndexId(0)));
    }

    #[test]
    fn cspdup_equal_to_ctime_is_flagged() {
        let mut inst = fixtures::build_interaction();
        inst.build_interactions[0].cspdup = 10.0;
        assert_eq!(inst.validate().codes(), vec![ViolationCode::CspdupGeCtime]);
    }

    #[test]
    fn three_cycle_reports_one_violation() {
        let mut inst = fixtures::dominated();
        inst.precedences = vec![
            Precedence { before: IndexId(0), after: IndexId(1) },
            Precedence { before: IndexId(1), after: IndexId(2) },
            Precedence { before: IndexId(2), after: IndexId(0) },
        ];
        let report = inst.validate();
        assert_eq!(report.codes(), vec![ViolationCode::PrecedenceCycle]);
        assert_eq!(report.violations[0].cycle.len(), 3);
    }

    #[test]
    fn qspdup_above_qtime_rejected() {
        let mut inst = fixtures::compete();
        inst.plans[1].qspdup = 100.5;
        assert_eq!(inst.validate().codes(), vec![ViolationCode::QspdupGtQtime]);
    }

    #[test]
    fn duplicate_plans_merge_to_max() {
        let mut inst = fixtures::compete();
        inst.plans = vec![
            PlanDef { id: PlanId(0), query: QueryId(0), indexes: vec![IndexId(0)], qspdup: 3.0 },
            PlanDef { id: PlanId(1), query: QueryId(0), indexes: vec![IndexId(0)], qspdup: 5.0 },
        ];
        assert!(inst.validate().contains(ViolationCode::DuplicatePlan));
        let canon = inst.canonicalize();
        assert_eq!(canon.plans.len(), 1);
        assert_eq!(canon.plans[0].qspdup, 5.0);
    }

    #[test]
    fn duplicate_build_interactions_merge_to_max() {
        let mut inst = fixtures::build_interaction();
        inst.build_interactions.push(BuildInteraction {
            target: IndexId(0),
            helper: IndexId(1),
            cspdup: 4.0,
        });
        inst.build_interactions[0].cspdup = 6.0;
        let canon = inst.canonicalize();
        assert_eq!(canon.build_interactions.len(), 1);
        assert_eq!(canon.build_interactions[0].cspdup, 6.0);
    }

    #[test]
    fn sparse_ids_are_redensified() {
        let mut inst = fixtures::compete();
        inst.indexes[0].id = IndexId(7);
        inst.indexes[1].id = IndexId(3);
        inst.plans[0].indexes = vec![IndexId(7)];
        inst.plans[1].indexes = vec![IndexId(3)];
        assert!(inst.validate().contains(ViolationCode::NonDenseId));
        let canon = inst.canonicalize();
        assert!(canon.validate().is_empty());
        // id 3 sorts first and becomes 0, carrying ctime 30.
        assert_eq!(canon.indexes[0].ctime, 30.0);
        assert_eq!(canon.plans[0].indexes, vec![IndexId(0)]);
        assert_eq!(canon.plans[0].qspdup, 20.0);
    }

    #[test]
    fn unknown_field_is_a_parse_error_naming_it() {
        let text = r#"{"name":"x","indexes":[],"queries":[],"plans":[],"colour":1}"#;
        let err = Instance::from_json_str(text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn dangling_plan_reference_is_rejected() {
        let text = r#"{"name":"x",
            "indexes":[{"id":0,"ctime":1},{"id":1,"ctime":1},{"id":2,"ctime":1}],
            "queries":[{"id":0,"qtime":10}],
            "plans":[{"id":0,"query":0,"indexes":[99],"qspdup":1}]}"#;
        match Instance::from_json_checked(text) {
            Err(Error::DanglingReference(msg)) => assert!(msg.contains("99"), "{msg}"),
            other => panic!("expected dangling reference, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("compete.json");
        let inst = fixtures::compete();
        inst.store(&path).unwrap();
        assert_eq!(Instance::load(&path).unwrap(), inst);
    }
}
