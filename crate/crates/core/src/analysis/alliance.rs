//! Indexes that are only ever useful together.

use std::collections::BTreeMap;

use crate::constraints::ConstraintSet;
use crate::model::Model;

/// Groups of indexes that appear in exactly the same (non-empty) set of
/// plans. Such a group gains nothing until its last member is built, so
/// building it consecutively loses nothing.
///
/// A member is dropped when it speeds up the build of a non-member, when it
/// is already part of a block, or when it is ordered against a non-member by
/// the current constraints: moving it later could break any of those.
pub fn detect_alliances(model: &Model, cs: &ConstraintSet) -> Vec<Vec<usize>> {
    let mut by_plans: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for i in 0..model.num_indexes() {
        let plans = model.plans_of_index(i);
        if !plans.is_empty() && cs.block_of(i).is_none() {
            by_plans.entry(plans).or_default().push(i);
        }
    }
    let mut out = Vec::new();
    for (_, mut group) in by_plans {
        loop {
            let before = group.len();
            let members = group.clone();
            group.retain(|&m| {
                model.helps(m).iter().all(|(t, _)| members.contains(t))
                    && (0..model.num_indexes())
                        .all(|x| members.contains(&x) || !cs.related(m, x))
            });
            if group.len() == before {
                break;
            }
        }
        if group.len() >= 2 {
            out.push(group);
        }
    }
    out
}
