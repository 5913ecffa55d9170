//! Shared inputs for the criterion benchmarks.

use idd_core::gen::{generate, Density, GenProfile};
use idd_core::heuristics::greedy;
use idd_core::{Deployment, Model};

/// Model of a seeded generated instance.
pub fn model(profile: &GenProfile, seed: u64) -> Model {
    Model::new(&generate(profile, seed).expect("profile is satisfiable")).expect("generated instances are valid")
}

/// A small custom instance that exact search finishes quickly.
pub fn small(indexes: usize, seed: u64) -> Model {
    let mut p = GenProfile::custom(indexes, indexes / 2 + 2, 3);
    p.density = Density::Mid;
    model(&p, seed)
}

pub fn greedy_start(model: &Model) -> Deployment {
    greedy(model)
}
