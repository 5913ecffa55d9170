//! Seeded synthetic instances shaped like TPC-H and TPC-DS index design
//! problems, plus small fixtures that each contain one detectable structure.
//!
//! Only counts are targeted. Magnitudes follow a fixed policy: query times
//! log-uniform on [1, 1000] s, build times log-uniform on [10, 3600] s, plan
//! speedups a Beta-distributed share of the query time, build speedups up to
//! 80% of the target's build time.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    BuildInteraction, IndexDef, IndexId, Instance, PlanDef, PlanId, Precedence, QueryDef, QueryId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Density {
    /// Only each query's best plan, no build interactions.
    Low,
    /// Best plan plus the runner-up, build interactions worth at least 15%.
    Mid,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenProfile {
    pub name: String,
    pub queries: usize,
    pub indexes: usize,
    pub plans: usize,
    pub max_plan_size: usize,
    pub build_interactions: usize,
    /// Plans using two or more indexes.
    pub multi_index_plans: usize,
    pub precedences: usize,
    pub density: Density,
}

impl GenProfile {
    pub fn tpch_like() -> Self {
        Self {
            name: "tpch-like".into(),
            queries: 22,
            indexes: 31,
            plans: 221,
            max_plan_size: 5,
            build_interactions: 31,
            multi_index_plans: 80,
            precedences: 0,
            density: Density::Full,
        }
    }

    pub fn tpcds_like() -> Self {
        Self {
            name: "tpcds-like".into(),
            queries: 102,
            indexes: 148,
            plans: 3386,
            max_plan_size: 13,
            build_interactions: 243,
            multi_index_plans: 1363,
            precedences: 0,
            density: Density::Full,
        }
    }

    /// A small profile: three plans per query, a third of them multi-index,
    /// about one build interaction per two indexes.
    pub fn custom(indexes: usize, queries: usize, max_plan_size: usize) -> Self {
        let max_plan_size = max_plan_size.min(indexes).max(1);
        let multi_index_plans = if max_plan_size >= 2 { queries } else { 0 };
        Self {
            name: "custom".into(),
            queries,
            indexes,
            plans: (3 * queries).min(queries * indexes + multi_index_plans),
            max_plan_size,
            build_interactions: if indexes > 1 { indexes / 2 + 1 } else { 0 },
            multi_index_plans,
            precedences: 0,
            density: Density::Full,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "tpch-like" => Some(Self::tpch_like()),
            "tpcds-like" => Some(Self::tpcds_like()),
            _ => None,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Unsatisfiable(m.to_string()));
        let (n, q) = (self.indexes, self.queries);
        if n == 0 || q == 0 || self.plans == 0 {
            return bad("counts must be positive");
        }
        if self.plans < q {
            return bad("fewer plans than queries");
        }
        if self.max_plan_size == 0 || self.max_plan_size > n {
            return bad("max plan size must be in 1..=indexes");
        }
        if self.multi_index_plans > self.plans {
            return bad("more multi-index plans than plans");
        }
        if self.multi_index_plans > 0 && self.max_plan_size < 2 {
            return bad("multi-index plans need max plan size >= 2");
        }
        if self.multi_index_plans < self.plans && self.max_plan_size > 1 && self.multi_index_plans == 0 {
            // Only single-index plans; fine unless the max size must be hit.
            return bad("max plan size above 1 needs a multi-index plan");
        }
        if self.plans - self.multi_index_plans > q * n {
            return bad("too many single-index plans for distinct (query, index) pairs");
        }
        if self.build_interactions > n * (n - 1) {
            return bad("too many build interactions");
        }
        if self.precedences > n * (n - 1) / 2 {
            return bad("too many precedences");
        }
        Ok(())
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Generates an instance matching `profile` (exactly, at full density).
pub fn generate(profile: &GenProfile, seed: u64) -> Result<Instance> {
    profile.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, nq) = (profile.indexes, profile.queries);
    let ctime: Vec<f64> = (0..n).map(|_| round3(log_uniform(&mut rng, 10.0, 3600.0))).collect();
    let qtime: Vec<f64> = (0..nq).map(|_| round3(log_uniform(&mut rng, 1.0, 1000.0))).collect();
    let groups = (n / 4).max(1);
    let group_of = |i: usize| i * groups / n;
    let members: Vec<Vec<usize>> = (0..groups).map(|g| (0..n).filter(|&i| group_of(i) == g).collect()).collect();

    // Plan slots: queries (each query at least once) and kinds.
    let mut slot_query: Vec<usize> = (0..nq).collect();
    while slot_query.len() < profile.plans {
        slot_query.push(rng.random_range(0..nq));
    }
    slot_query.shuffle(&mut rng);
    let mut multi = vec![false; profile.plans];
    for k in rand::seq::index::sample(&mut rng, profile.plans, profile.multi_index_plans) {
        multi[k] = true;
    }
    let single_beta = Beta::new(2.0, 5.0).expect("valid beta");
    let multi_beta = Beta::new(2.0, 3.0).expect("valid beta");

    let mut used: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let mut plans = Vec::with_capacity(profile.plans);
    let mut uncovered: Vec<usize> = (0..n).collect();
    uncovered.shuffle(&mut rng);
    let mut need_max = profile.multi_index_plans > 0;
    for k in 0..profile.plans {
        let mut q = slot_query[k];
        let mut attempts = 0;
        let set = loop {
            let set = if multi[k] {
                let size = if need_max { profile.max_plan_size } else { rng.random_range(2..=profile.max_plan_size) };
                draw_set(&mut rng, &members, n, size, uncovered.pop())
            } else {
                vec![uncovered.pop().unwrap_or_else(|| rng.random_range(0..n))]
            };
            if used.insert((q, set.clone())) {
                break set;
            }
            attempts += 1;
            if attempts % 8 == 0 {
                q = rng.random_range(0..nq);
            }
        };
        if multi[k] {
            need_max = false;
        }
        let share: f64 = if multi[k] { multi_beta.sample(&mut rng) } else { single_beta.sample(&mut rng) };
        let s = (qtime[q] * share * 1000.0).floor() / 1000.0;
        plans.push((q, set, s.max(0.001).min(qtime[q])));
    }

    let mut builds: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut build_list = Vec::new();
    while build_list.len() < profile.build_interactions {
        let t = rng.random_range(0..n);
        let same = &members[group_of(t)];
        let h = if same.len() > 1 && rng.random_bool(0.8) {
            *same.choose(&mut rng).expect("non-empty group")
        } else {
            rng.random_range(0..n)
        };
        if h != t && builds.insert((t, h)) {
            let c = round3(ctime[t] * rng.random_range(0.05..0.8));
            build_list.push((t, h, c));
        }
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut precs: BTreeSet<(usize, usize)> = BTreeSet::new();
    while precs.len() < profile.precedences {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a < b {
            precs.insert((perm[a], perm[b]));
        }
    }

    let (plans, build_list) = thin(profile.density, &ctime, plans, build_list);
    let inst = assemble(
        &format!("{}-{seed}", profile.name),
        &ctime,
        &qtime,
        &plans,
        &build_list,
        &precs.into_iter().collect::<Vec<_>>(),
    );
    Ok(inst)
}

/// Distinct indexes, mostly from one pseudo-table group.
fn draw_set(rng: &mut ChaCha8Rng, members: &[Vec<usize>], n: usize, size: usize, seed_index: Option<usize>) -> Vec<usize> {
    let home = match seed_index {
        Some(i) => members.iter().position(|g| g.contains(&i)).expect("index has a group"),
        None => rng.random_range(0..members.len()),
    };
    let mut set: BTreeSet<usize> = seed_index.into_iter().collect();
    while set.len() < size {
        let local: Vec<usize> = members[home].iter().copied().filter(|i| !set.contains(i)).collect();
        let pick = if !local.is_empty() && rng.random_bool(0.8) {
            *local.choose(rng).expect("non-empty")
        } else {
            rng.random_range(0..n)
        };
        set.insert(pick);
    }
    set.into_iter().collect()
}

type PlanSpec = (usize, Vec<usize>, f64);

fn thin(
    density: Density,
    ctime: &[f64],
    plans: Vec<PlanSpec>,
    builds: Vec<(usize, usize, f64)>,
) -> (Vec<PlanSpec>, Vec<(usize, usize, f64)>) {
    let keep = match density {
        Density::Full => return (plans, builds),
        Density::Low => 1,
        Density::Mid => 2,
    };
    let mut by_query: std::collections::BTreeMap<usize, Vec<PlanSpec>> = Default::default();
    for p in plans {
        by_query.entry(p.0).or_default().push(p);
    }
    let mut out = Vec::new();
    for (_, mut ps) in by_query {
        ps.sort_by(|a, b| b.2.total_cmp(&a.2));
        out.extend(ps.into_iter().take(keep));
    }
    let builds = match density {
        Density::Low => Vec::new(),
        _ => builds.into_iter().filter(|&(t, _, c)| c >= 0.15 * ctime[t]).collect(),
    };
    (out, builds)
}

fn assemble(
    name: &str,
    ctime: &[f64],
    qtime: &[f64],
    plans: &[PlanSpec],
    builds: &[(usize, usize, f64)],
    precs: &[(usize, usize)],
) -> Instance {
    Instance {
        name: name.to_string(),
        indexes: ctime.iter().enumerate().map(|(k, &ctime)| IndexDef { id: IndexId::from(k), ctime }).collect(),
        queries: qtime.iter().enumerate().map(|(k, &qtime)| QueryDef { id: QueryId::from(k), qtime }).collect(),
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
            .map(|&(t, h, c)| BuildInteraction { target: t.into(), helper: h.into(), cspdup: c })
            .collect(),
        precedences: precs.iter().map(|&(a, b)| Precedence { before: a.into(), after: b.into() }).collect(),
    }
    .canonicalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Alliance,
    Colony,
    Dominated,
    Disjoint,
    Tail,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 5] =
        [FixtureKind::Alliance, FixtureKind::Colony, FixtureKind::Dominated, FixtureKind::Disjoint, FixtureKind::Tail];
}

/// A small instance (at most 12 indexes) built around one occurrence of
/// `kind` on top of a random six-index background.
pub fn generate_property_fixture(kind: FixtureKind, seed: u64) -> Instance {
    let base = generate(&GenProfile::custom(6, 4, 3), seed).expect("small profile is satisfiable");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut ctime: Vec<f64> = base.indexes.iter().map(|d| d.ctime).collect();
    let mut qtime: Vec<f64> = base.queries.iter().map(|d| d.qtime).collect();
    let mut plans: Vec<PlanSpec> = base
        .plans
        .iter()
        .map(|p| (p.query.index(), p.indexes.iter().map(|i| i.index()).collect(), p.qspdup))
        .collect();
    let builds: Vec<(usize, usize, f64)> =
        base.build_interactions.iter().map(|b| (b.target.index(), b.helper.index(), b.cspdup)).collect();
    let mut precs: Vec<(usize, usize)> = Vec::new();
    let new_query = |qtime: &mut Vec<f64>, t: f64| {
        qtime.push(t);
        qtime.len() - 1
    };
    let new_index = |ctime: &mut Vec<f64>, c: f64| {
        ctime.push(c);
        ctime.len() - 1
    };
    match kind {
        FixtureKind::Alliance => {
            let a = new_index(&mut ctime, round3(rng.random_range(10.0..100.0)));
            let b = new_index(&mut ctime, round3(rng.random_range(10.0..100.0)));
            let q = new_query(&mut qtime, 500.0);
            plans.push((q, vec![a, b], round3(rng.random_range(100.0..400.0))));
            let q2 = rng.random_range(0..4);
            plans.push((q2, vec![a, b], round3(qtime[q2] * 0.5)));
        }
        FixtureKind::Colony => {
            let j = plans[rng.random_range(0..plans.len())].1[0];
            let c = new_index(&mut ctime, round3(rng.random_range(10.0..100.0)));
            let q = new_query(&mut qtime, 300.0);
            plans.push((q, vec![c, j], round3(rng.random_range(50.0..250.0))));
        }
        FixtureKind::Dominated => {
            let cost = round3(rng.random_range(10.0..100.0));
            let strong = new_index(&mut ctime, cost);
            let weak = new_index(&mut ctime, cost);
            let qs = new_query(&mut qtime, 1000.0);
            let qw = new_query(&mut qtime, 1000.0);
            plans.push((qs, vec![strong], 500.0));
            plans.push((qw, vec![weak], round3(rng.random_range(50.0..400.0))));
        }
        FixtureKind::Disjoint => {
            for _ in 0..2 {
                let i = new_index(&mut ctime, round3(rng.random_range(10.0..100.0)));
                let q = new_query(&mut qtime, 400.0);
                plans.push((q, vec![i], round3(rng.random_range(10.0..390.0))));
            }
        }
        FixtureKind::Tail => {
            let t = new_index(&mut ctime, 50.0);
            let u = new_index(&mut ctime, 20.0);
            let qt = new_query(&mut qtime, 400.0);
            let qu = new_query(&mut qtime, 400.0);
            // u is denser: 200/20 against at most 200/50.
            plans.push((qt, vec![t], round3(rng.random_range(20.0..200.0))));
            plans.push((qu, vec![u], 200.0));
            for x in 0..6 {
                precs.push((x, t));
                precs.push((x, u));
            }
        }
    }
    assemble(&format!("fixture-{kind:?}-{seed}").to_lowercase(), &ctime, &qtime, &plans, &builds, &precs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(inst: &Instance) -> (usize, usize, usize, usize, usize, usize) {
        (
            inst.queries.len(),
            inst.indexes.len(),
            inst.plans.len(),
            inst.plans.iter().map(|p| p.indexes.len()).max().unwrap_or(0),
            inst.build_interactions.len(),
            inst.plans.iter().filter(|p| p.indexes.len() >= 2).count(),
        )
    }

    #[test]
    fn tpch_like_counts() {
        let inst = generate(&GenProfile::tpch_like(), 1).unwrap();
        assert!(inst.validate().is_empty(), "{:?}", inst.validate());
        assert_eq!(counts(&inst), (22, 31, 221, 5, 31, 80));
    }

    #[test]
    fn tpcds_like_counts() {
        let inst = generate(&GenProfile::tpcds_like(), 7).unwrap();
        assert!(inst.validate().is_empty());
        assert_eq!(counts(&inst), (102, 148, 3386, 13, 243, 1363));
    }

    #[test]
    fn deterministic_per_seed() {
        let p = GenProfile::tpch_like();
        assert_eq!(generate(&p, 3).unwrap(), generate(&p, 3).unwrap());
        assert_ne!(generate(&p, 3).unwrap(), generate(&p, 4).unwrap());
    }

    #[test]
    fn low_density_keeps_best_plans_only() {
        let mut p = GenProfile::custom(6, 4, 3);
        p.density = Density::Low;
        let inst = generate(&p, 2).unwrap();
        assert!(inst.validate().is_empty());
        assert_eq!(inst.plans.len(), 4);
        assert!(inst.build_interactions.is_empty());
    }

    #[test]
    fn mid_density_filters_weak_builds() {
        let mut p = GenProfile::tpch_like();
        p.density = Density::Mid;
        let inst = generate(&p, 2).unwrap();
        assert!(inst.plans.len() <= 44);
        let ctime: Vec<f64> = inst.indexes.iter().map(|d| d.ctime).collect();
        assert!(inst.build_interactions.iter().all(|b| b.cspdup >= 0.15 * ctime[b.target.index()]));
    }

    #[test]
    fn unsatisfiable_profiles_rejected() {
        let mut p = GenProfile::custom(6, 4, 3);
        p.plans = 2;
        assert!(matches!(generate(&p, 0), Err(Error::Unsatisfiable(_))));
    }

    #[test]
    fn fixtures_are_valid_and_small() {
        for kind in FixtureKind::ALL {
            for seed in 0..5 {
                let inst = generate_property_fixture(kind, seed);
                assert!(inst.validate().is_empty(), "{kind:?} {seed}");
                assert!(inst.indexes.len() <= 12);
            }
        }
    }
}
