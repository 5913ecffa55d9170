//! `idd`: validate, analyze, solve, benchmark and generate index deployment
//! ordering instances.
//!
//! JSON and CSV go to stdout (or `--out`), logs to stderr. Verbosity comes
//! from `IDD_LOG` (`error`, `warn`, `info`, `debug`, `trace`).
//!
//! Exit codes: 0 ok, 1 domain failure, 2 I/O or parse failure, 3 no solution
//! within the limits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use idd_core::analysis::{analyze, AnalysisOptions, AnalysisReport};
use idd_core::clock::ClockMode;
use idd_core::eval::objective_of;
use idd_core::gen::{generate, generate_property_fixture, Density, FixtureKind, GenProfile};
use idd_core::heuristics::{dp_schedule, greedy, random_order};
use idd_core::instance::fixtures;
use idd_core::local::{lns, portfolio, tabu_bswap, tabu_fswap, timeline_csv, LnsParams, TabuParams, VnsParams};
use idd_core::{brute_force, evaluate, solve_exact, ConstraintSet, Deployment, Error, IndexId, Instance, Model, SearchLimits, SearchStats};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "idd", version, about = "Index deployment ordering solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the invariant violations of an instance as JSON.
    Validate { instance: PathBuf },
    /// Run the structural analyzer and print the constraint report.
    Analyze {
        instance: PathBuf,
        /// Analyzer time budget in seconds.
        #[arg(long, default_value_t = 60.0)]
        budget: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        clock: ClockArgs,
    },
    /// Solve one instance and print the solution as JSON.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Write the per-step improvement curve of the solution here.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Write the incumbent timeline here.
        #[arg(long)]
        timeline: Option<PathBuf>,
        /// Start order for local search (array of ids, or a solution file).
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run algorithms over every instance file in a directory; one CSV row
    /// per (instance, algorithm).
    Bench {
        corpus: PathBuf,
        /// Comma separated; `random` is the average of 100 random orders.
        #[arg(long, value_delimiter = ',', default_value = "greedy,dp,vns")]
        algos: Vec<BenchAlgo>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic instance.
    Gen {
        #[arg(long, value_enum, default_value_t = Profile::TpchLike)]
        profile: Profile,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Custom profile sizes.
        #[arg(long, default_value_t = 8)]
        indexes: usize,
        #[arg(long, default_value_t = 5)]
        queries: usize,
        #[arg(long, default_value_t = 3)]
        max_plan_size: usize,
        #[arg(long, value_enum)]
        density: Option<DensityArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an order and print its improvement curve as CSV.
    Curve {
        instance: PathBuf,
        /// Order to evaluate (array of ids, or a solution file); greedy when absent.
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Algo::Vns)]
    algo: Algo,
    /// Prune with analyzer constraints. With a path, read them from a
    /// sidecar written by `analyze`; otherwise analyze first.
    #[arg(long, num_args = 0..=1, value_name = "SIDECAR", conflicts_with = "no_constraints")]
    constraints: Option<Option<PathBuf>>,
    /// Keep only the hard precedences of the instance.
    #[arg(long)]
    no_constraints: bool,
    /// Seconds; local search defaults to 10.
    #[arg(long)]
    deadline: Option<f64>,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Analyzer time budget in seconds.
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    #[command(flatten)]
    clock: ClockArgs,
}

#[derive(Args, Clone, Copy)]
struct ClockArgs {
    /// Measure deadlines in real seconds. The default work clock counts
    /// search steps, so seeded runs repeat exactly.
    #[arg(long, conflicts_with = "deterministic")]
    wall_clock: bool,
    /// Use the work clock (the default).
    #[arg(long)]
    deterministic: bool,
}

impl ClockArgs {
    fn mode(self) -> ClockMode {
        if self.wall_clock {
            ClockMode::Wall
        } else {
            ClockMode::deterministic()
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Debug)]
enum Algo {
    Exact,
    Brute,
    Greedy,
    Dp,
    TabuBswap,
    TabuFswap,
    Lns,
    Vns,
    Portfolio,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Debug)]
enum BenchAlgo {
    Random,
    Exact,
    Brute,
    Greedy,
    Dp,
    TabuBswap,
    TabuFswap,
    Lns,
    Vns,
    Portfolio,
}

#[derive(Copy, Clone, ValueEnum)]
enum Profile {
    TpchLike,
    TpcdsLike,
    Custom,
    Compete,
    Build,
    Alliance,
    Dominated,
    AllianceFixture,
    ColonyFixture,
    DominatedFixture,
    DisjointFixture,
    TailFixture,
}

#[derive(Copy, Clone, ValueEnum)]
enum DensityArg {
    Low,
    Mid,
    Full,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Io { .. } => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IDD_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> CliResult<u8> {
    match command {
        Command::Validate { instance } => cmd_validate(&instance),
        Command::Analyze { instance, budget, out, clock } => {
            let model = load_model(&instance)?;
            let (_, report) = run_analysis(&model, budget, clock.mode())?;
            emit(out.as_deref(), &(report.to_json_string() + "\n"))?;
            Ok(0)
        }
        Command::Solve { instance, run, curve, timeline, start, out } => {
            cmd_solve(&instance, &run, curve.as_deref(), timeline.as_deref(), start.as_deref(), out.as_deref())
        }
        Command::Bench { corpus, algos, run, out } => cmd_bench(&corpus, &algos, &run, out.as_deref()),
        Command::Gen { profile, seed, indexes, queries, max_plan_size, density, out } => {
            let inst = match profile {
                Profile::TpchLike | Profile::TpcdsLike | Profile::Custom => {
                    let mut p = match profile {
                        Profile::TpchLike => GenProfile::tpch_like(),
                        Profile::TpcdsLike => GenProfile::tpcds_like(),
                        _ => GenProfile::custom(indexes, queries, max_plan_size),
                    };
                    if let Some(d) = density {
                        p.density = match d {
                            DensityArg::Low => Density::Low,
                            DensityArg::Mid => Density::Mid,
                            DensityArg::Full => Density::Full,
                        };
                    }
                    generate(&p, seed)?
                }
                Profile::Compete => fixtures::compete(),
                Profile::Build => fixtures::build_interaction(),
                Profile::Alliance => fixtures::alliance(),
                Profile::Dominated => fixtures::dominated(),
                Profile::AllianceFixture => generate_property_fixture(FixtureKind::Alliance, seed),
                Profile::ColonyFixture => generate_property_fixture(FixtureKind::Colony, seed),
                Profile::DominatedFixture => generate_property_fixture(FixtureKind::Dominated, seed),
                Profile::DisjointFixture => generate_property_fixture(FixtureKind::Disjoint, seed),
                Profile::TailFixture => generate_property_fixture(FixtureKind::Tail, seed),
            };
            let mut text = inst.to_json_string();
            text.push('\n');
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Curve { instance, start, out } => {
            let model = load_model(&instance)?;
            let order = match start {
                Some(p) => read_order(&p)?,
                None => greedy(&model),
            };
            let result = evaluate(&model, &order)?;
            emit(out.as_deref(), &result.curve_csv())?;
            Ok(0)
        }
    }
}

fn cmd_validate(path: &Path) -> CliResult<u8> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let inst = Instance::from_json_str(&text)?;
    let report = inst.validate();
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.is_empty() { 0 } else { 1 })
}

fn load_model(path: &Path) -> CliResult<Model> {
    let inst = Instance::load(path)?;
    Ok(Model::new(&inst)?)
}

fn run_analysis(model: &Model, budget: f64, clock: ClockMode) -> CliResult<(ConstraintSet, AnalysisReport)> {
    if !(budget > 0.0) {
        return Err(Failure::domain("--budget must be positive"));
    }
    let opts = AnalysisOptions { time_budget: Some(budget), clock, ..AnalysisOptions::default() };
    let (cs, report) = analyze(model, &opts)?;
    info!(
        "analysis: {} alliances, {} colonized, {} dominated, {} disjoint, {} tail fixes in {:.3}s",
        report.alliances.len(),
        report.colonized.len(),
        report.dominated.len(),
        report.disjoint_order.len(),
        report.tail_fixes.len(),
        report.elapsed
    );
    if report.timed_out {
        warn!("analysis stopped at its budget; constraints are partial");
    }
    Ok((cs, report))
}

fn constraints_for(model: &Model, run: &RunArgs) -> CliResult<ConstraintSet> {
    if run.no_constraints {
        return Ok(ConstraintSet::from_model(model));
    }
    match &run.constraints {
        Some(Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            Ok(AnalysisReport::from_json_str(&text)?.constraint_set(model.num_indexes())?)
        }
        _ => Ok(run_analysis(model, run.budget, run.clock.mode())?.0),
    }
}

/// Reads an order from a JSON array of ids or an object with an `order` field.
fn read_order(path: &Path) -> CliResult<Deployment> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let list = match value {
        serde_json::Value::Object(mut map) => map.remove("order").unwrap_or(serde_json::Value::Null),
        other => other,
    };
    serde_json::from_value(list).map_err(|e| Failure::io(format!("{}: expected an order: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Solution {
    instance: String,
    algorithm: String,
    objective: Option<f64>,
    order: Option<Vec<IndexId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    proven: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<u64>,
    stats: SearchStats,
}

fn solve(model: &Model, algo: Algo, run: &RunArgs, start: Option<Deployment>) -> CliResult<Solution> {
    let clock = run.clock.mode();
    let needs_constraints = matches!(algo, Algo::Exact | Algo::Lns | Algo::Vns | Algo::Portfolio);
    let cs = if needs_constraints { Some(constraints_for(model, run)?) } else { None };
    let mut sol = Solution {
        instance: model.name().to_string(),
        algorithm: algo_name(algo),
        objective: None,
        order: None,
        proven: None,
        iterations: None,
        stats: SearchStats::default(),
    };
    let heuristic = |dep: Deployment, sol: &mut Solution| {
        sol.objective = Some(objective_of(model, &dep.indices()));
        sol.order = Some(dep.order);
    };
    match algo {
        Algo::Greedy => heuristic(greedy(model), &mut sol),
        Algo::Dp => heuristic(dp_schedule(model), &mut sol),
        Algo::Exact | Algo::Brute => {
            let out = if algo == Algo::Brute {
                brute_force(model)?
            } else {
                let limits = SearchLimits { max_nodes: run.max_nodes, max_seconds: run.deadline, clock };
                solve_exact(model, cs.as_ref().expect("constraints computed"), limits)?
            };
            sol.objective = out.objective;
            sol.order = out.best.map(|d| d.order);
            sol.proven = Some(out.proven);
            sol.stats = out.stats;
        }
        Algo::TabuBswap | Algo::TabuFswap | Algo::Lns | Algo::Vns | Algo::Portfolio => {
            let mut start = start.unwrap_or_else(|| greedy(model));
            if let Some(cs) = &cs {
                start.check_permutation(model.num_indexes())?;
                if cs.check(&start.indices()).is_err() {
                    let repaired = cs
                        .repair(&start.indices())
                        .ok_or_else(|| Failure::domain("start order cannot be repaired to the constraints"))?;
                    info!("start order repaired to satisfy the constraints");
                    start = Deployment::from_indices(repaired);
                }
            }
            let deadline = Some(run.deadline.unwrap_or(10.0));
            let tabu = TabuParams { deadline, seed: run.seed, clock, ..TabuParams::default() };
            let lns_params = LnsParams { deadline, seed: run.seed, clock, ..LnsParams::default() };
            let vns_params = VnsParams { lns: lns_params.clone(), ..VnsParams::default() };
            let cs = cs.as_ref();
            let out = match algo {
                Algo::TabuBswap => tabu_bswap(model, &start, &tabu)?,
                Algo::TabuFswap => tabu_fswap(model, &start, &tabu)?,
                Algo::Lns => lns(model, cs.expect("constraints computed"), &start, &lns_params)?,
                Algo::Vns => idd_core::local::vns(model, cs.expect("constraints computed"), &start, &vns_params)?,
                _ => portfolio(model, cs.expect("constraints computed"), &start, &tabu, &vns_params)?,
            };
            sol.objective = Some(out.objective);
            sol.order = Some(out.best.order);
            sol.iterations = Some(out.iterations);
            sol.stats = out.stats;
        }
    }
    Ok(sol)
}

fn cmd_solve(
    path: &Path,
    run: &RunArgs,
    curve: Option<&Path>,
    timeline: Option<&Path>,
    start: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<u8> {
    let model = load_model(path)?;
    let start = start.map(read_order).transpose()?;
    let sol = solve(&model, run.algo, run, start)?;
    let mut text = serde_json::to_string_pretty(&sol).expect("solution serializes");
    text.push('\n');
    emit(out, &text)?;
    if let Some(p) = timeline {
        fs::write(p, timeline_csv(&sol.stats.incumbent_timeline))
            .map_err(|e| Failure::io(format!("{}: {e}", p.display())))?;
    }
    let Some(order) = sol.order else {
        eprintln!("error: no solution within the limits");
        return Ok(3);
    };
    if let Some(p) = curve {
        let result = evaluate(&model, &Deployment::new(order))?;
        fs::write(p, result.curve_csv()).map_err(|e| Failure::io(format!("{}: {e}", p.display())))?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct BenchRow {
    instance: String,
    algorithm: String,
    objective: Option<f64>,
    time_to_best_s: f64,
    nodes: u64,
    proven: Option<bool>,
}

fn cmd_bench(corpus: &Path, algos: &[BenchAlgo], run: &RunArgs, out: Option<&Path>) -> CliResult<u8> {
    let entries = fs::read_dir(corpus).map_err(|e| Failure::io(format!("{}: {e}", corpus.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::domain(format!("no instance files in {}", corpus.display())));
    }
    let mut rows = Vec::new();
    for file in &files {
        let model = load_model(file)?;
        let name = file.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        for &algo in algos {
            let started = Instant::now();
            let row = match algo {
                BenchAlgo::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
                    let total: f64 =
                        (0..100).map(|_| objective_of(&model, &random_order(&model, &mut rng).indices())).sum();
                    BenchRow {
                        instance: name.clone(),
                        algorithm: "random".into(),
                        objective: Some(total / 100.0),
                        time_to_best_s: started.elapsed().as_secs_f64(),
                        nodes: 0,
                        proven: None,
                    }
                }
                other => {
                    let algo = to_algo(other);
                    let sol = solve(&model, algo, run, None)?;
                    let time_to_best = sol
                        .stats
                        .incumbent_timeline
                        .last()
                        .map_or_else(|| started.elapsed().as_secs_f64(), |&(t, _)| t);
                    BenchRow {
                        instance: name.clone(),
                        algorithm: sol.algorithm,
                        objective: sol.objective,
                        time_to_best_s: time_to_best,
                        nodes: sol.stats.nodes,
                        proven: sol.proven,
                    }
                }
            };
            info!("{} {}: {:?}", row.instance, row.algorithm, row.objective);
            rows.push(row);
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| Failure::io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::io(e.to_string()))?;
    emit(out, &String::from_utf8(bytes).expect("csv is utf-8"))?;
    for &algo in algos {
        let mut values: Vec<f64> = rows
            .iter()
            .filter(|r| r.algorithm == bench_name(algo))
            .filter_map(|r| r.objective)
            .collect();
        if values.is_empty() {
            continue;
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mid = values.len() / 2;
        let median = if values.len().is_multiple_of(2) { (values[mid - 1] + values[mid]) / 2.0 } else { values[mid] };
        eprintln!("{}: mean {mean:.6} median {median:.6} over {}", bench_name(algo), values.len());
    }
    Ok(0)
}

fn to_algo(b: BenchAlgo) -> Algo {
    match b {
        BenchAlgo::Exact => Algo::Exact,
        BenchAlgo::Brute => Algo::Brute,
        BenchAlgo::Greedy => Algo::Greedy,
        BenchAlgo::Dp => Algo::Dp,
        BenchAlgo::TabuBswap => Algo::TabuBswap,
        BenchAlgo::TabuFswap => Algo::TabuFswap,
        BenchAlgo::Lns => Algo::Lns,
        BenchAlgo::Vns | BenchAlgo::Random => Algo::Vns,
        BenchAlgo::Portfolio => Algo::Portfolio,
    }
}

fn bench_name(b: BenchAlgo) -> String {
    match b {
        BenchAlgo::Random => "random".into(),
        other => algo_name(to_algo(other)),
    }
}

fn algo_name(a: Algo) -> String {
    a.to_possible_value().expect("no skipped variants").get_name().to_string()
}
