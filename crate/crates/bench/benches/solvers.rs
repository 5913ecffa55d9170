use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use idd_bench::{greedy_start, model, small};
use idd_core::analysis::{analyze, AnalysisOptions};
use idd_core::clock::ClockMode;
use idd_core::eval::objective_of;
use idd_core::gen::GenProfile;
use idd_core::heuristics::{dp_schedule, greedy};
use idd_core::local::{tabu_fswap, vns, LnsParams, TabuParams, VnsParams};
use idd_core::{solve_exact, swap_delta, ConstraintSet, PrefixState, SearchLimits};

fn evaluation(c: &mut Criterion) {
    let m = model(&GenProfile::tpcds_like(), 0);
    let order = greedy_start(&m);
    let idx = order.indices();
    c.bench_function("objective tpcds", |b| b.iter(|| objective_of(&m, &idx)));
    c.bench_function("swap_delta tpcds", |b| b.iter(|| swap_delta(&m, &order, 10, 120).unwrap()));
    c.bench_function("prefix push+pop tpcds", |b| {
        b.iter_batched(
            || PrefixState::from_prefix(&m, &idx[..74]),
            |mut s| {
                s.push(&m, idx[74]);
                s.pop(&m)
            },
            BatchSize::SmallInput,
        )
    });
}

fn heuristics(c: &mut Criterion) {
    let m = model(&GenProfile::tpch_like(), 0);
    c.bench_function("greedy tpch", |b| b.iter(|| greedy(&m)));
    c.bench_function("dp tpch", |b| b.iter(|| dp_schedule(&m)));
}

fn exact(c: &mut Criterion) {
    let m = small(9, 3);
    let free = ConstraintSet::from_model(&m);
    let (cs, _) = analyze(&m, &AnalysisOptions::default()).unwrap();
    let mut g = c.benchmark_group("exact n=9");
    g.sample_size(10);
    g.bench_function("unconstrained", |b| b.iter(|| solve_exact(&m, &free, SearchLimits::unlimited()).unwrap()));
    g.bench_function("analyzer constraints", |b| b.iter(|| solve_exact(&m, &cs, SearchLimits::unlimited()).unwrap()));
    g.bench_function("analyze", |b| b.iter(|| analyze(&m, &AnalysisOptions::default()).unwrap()));
    g.finish();
}

fn local(c: &mut Criterion) {
    let m = model(&GenProfile::tpch_like(), 1);
    let cs = ConstraintSet::from_model(&m);
    let start = greedy_start(&m);
    let clock = ClockMode::deterministic();
    let mut g = c.benchmark_group("local tpch, 0.2 work-seconds");
    g.sample_size(10);
    g.bench_function("tabu-fswap", |b| {
        let p = TabuParams { deadline: Some(0.2), clock, ..TabuParams::default() };
        b.iter(|| tabu_fswap(&m, &start, &p).unwrap())
    });
    g.bench_function("vns", |b| {
        let p = VnsParams { lns: LnsParams { deadline: Some(0.2), clock, ..LnsParams::default() }, ..VnsParams::default() };
        b.iter(|| vns(&m, &cs, &start, &p).unwrap())
    });
    g.finish();
}

criterion_group!(benches, evaluation, heuristics, exact, local);
criterion_main!(benches);
