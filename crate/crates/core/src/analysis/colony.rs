//! Indexes whose every plan also needs some other index.

use crate::constraints::ConstraintSet;
use crate::model::Model;

/// `(colonized, colonizer)` pairs: every plan of the colonized index also
/// contains the colonizer, which appears in further plans.
///
/// Blocks are treated as one unit, since all their members share the same
/// plans. A unit qualifies when it speeds up no build outside itself and has
/// no constraint forcing anything after it. Pairs are applied one at a time
/// so later candidates see earlier ones.
pub fn detect_colonized(model: &Model, cs: &ConstraintSet) -> Vec<(usize, usize)> {
    let n = model.num_indexes();
    let mut cs = cs.clone();
    let mut units: Vec<Vec<usize>> = cs.blocks().to_vec();
    units.extend((0..n).filter(|&i| cs.block_of(i).is_none()).map(|i| vec![i]));
    units.sort();

    let mut out = Vec::new();
    for unit in units {
        let plans = model.plans_of_index(unit[0]);
        if plans.is_empty() || unit.iter().any(|&u| model.plans_of_index(u) != plans) {
            continue;
        }
        if unit
            .iter()
            .any(|&u| model.helps(u).iter().any(|(t, _)| !unit.contains(t)))
        {
            continue;
        }
        // Indexes present in every plan of the unit.
        let mut common: Vec<usize> = model.plan_indexes(plans[0]).to_vec();
        for &p in &plans[1..] {
            common.retain(|j| model.plan_indexes(p).contains(j));
        }
        common.retain(|j| !unit.contains(j));
        for j in common {
            if model.plans_of_index(j).len() <= plans.len() {
                continue;
            }
            let blocked = unit
                .iter()
                .any(|&u| cs.descendants(u).ones().any(|d| !unit.contains(&d)));
            if blocked {
                break;
            }
            for &u in &unit {
                if cs.add_precedence(j, u) {
                    out.push((u, j));
                }
            }
        }
    }
    out
}
