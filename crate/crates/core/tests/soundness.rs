//! Analyzer constraints never cut away every optimum.

use idd_core::analysis::{analyze, AnalysisOptions};
use idd_core::gen::{generate, generate_property_fixture, Density, FixtureKind, GenProfile};
use idd_core::search::{brute_force, solve_exact, SearchLimits};
use idd_core::{ConstraintSet, Instance, Model};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn check(inst: &Instance) {
    let model = Model::new(inst).unwrap();
    let oracle = brute_force(&model).unwrap().objective.unwrap();
    let (cs, _) = analyze(&model, &AnalysisOptions::default()).unwrap();
    let out = solve_exact(&model, &cs, SearchLimits::unlimited()).unwrap();
    assert!(out.proven);
    let found = out.objective.unwrap();
    assert!(close(found, oracle), "{}: constrained {found} vs brute force {oracle}", inst.name);
    let plain = solve_exact(&model, &ConstraintSet::from_model(&model), SearchLimits::unlimited()).unwrap();
    assert!(close(plain.objective.unwrap(), oracle), "{}: plain search", inst.name);
}

fn profile(seed: u64) -> GenProfile {
    let n = 3 + (seed % 6) as usize;
    let q = 2 + (seed % 4) as usize;
    let mut p = GenProfile::custom(n, q, 1 + (seed % 3) as usize);
    p.density = [Density::Low, Density::Mid, Density::Full][(seed / 7 % 3) as usize];
    p.precedences = if seed.is_multiple_of(5) { (seed % 3) as usize } else { 0 };
    p.build_interactions = (seed % 4) as usize;
    p
}

#[test]
fn random_small_instances() {
    for seed in 0..150 {
        check(&generate(&profile(seed), seed).unwrap());
    }
}

#[test]
fn property_fixtures() {
    for kind in FixtureKind::ALL {
        for seed in 0..6 {
            check(&generate_property_fixture(kind, seed));
        }
    }
}
