use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn idd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idd")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, profile: &[&str]) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let mut args = vec!["gen"];
    args.extend_from_slice(profile);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = idd(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

const CYCLIC: &str = r#"{
  "name": "cyclic",
  "indexes": [{"id": 0, "ctime": 10.0}, {"id": 1, "ctime": 20.0}],
  "queries": [{"id": 0, "qtime": 100.0}],
  "plans": [{"id": 0, "query": 0, "indexes": [0], "qspdup": 10.0}],
  "build_interactions": [],
  "precedences": [{"before": 0, "after": 1}, {"before": 1, "after": 0}]
}"#;

#[test]
fn validate_reports_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let good = gen(dir.path(), "compete", &["--profile", "compete"]);
    let out = idd(&["validate", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out), serde_json::json!([]));

    let bad = dir.path().join("cyclic.json");
    std::fs::write(&bad, CYCLIC).unwrap();
    let out = idd(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report.as_array().unwrap().len(), 1);

    let out = idd(&["validate", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(idd(&["validate", garbage.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn analyze_finds_fixture_structures() {
    let dir = tempfile::tempdir().unwrap();
    let alliance = gen(dir.path(), "alliance", &["--profile", "alliance"]);
    let report = json(&idd(&["analyze", alliance.to_str().unwrap(), "--budget", "5"]));
    assert_eq!(report["alliances"].as_array().unwrap().len(), 1);

    let dom = gen(dir.path(), "dom", &["--profile", "dominated"]);
    let report = json(&idd(&["analyze", dom.to_str().unwrap(), "--budget", "5"]));
    assert_eq!(report["dominated"], serde_json::json!([[0, 1]]));

    let bad = dir.path().join("cyclic.json");
    std::fs::write(&bad, CYCLIC).unwrap();
    assert_eq!(idd(&["analyze", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn solve_brute_and_exact_agree() {
    let dir = tempfile::tempdir().unwrap();
    let compete = gen(dir.path(), "compete", &["--profile", "compete"]);
    let sol = json(&idd(&["solve", compete.to_str().unwrap(), "--algo", "brute"]));
    assert!((sol["objective"].as_f64().unwrap() - 3800.0).abs() < 1e-9);
    assert_eq!(sol["proven"], serde_json::json!(true));

    let small = gen(dir.path(), "small", &["--profile", "custom", "--indexes", "7", "--seed", "3"]);
    let p = small.to_str().unwrap();
    let brute = json(&idd(&["solve", p, "--algo", "brute"]));
    let exact = json(&idd(&["solve", p, "--algo", "exact", "--constraints"]));
    let (a, b) = (brute["objective"].as_f64().unwrap(), exact["objective"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-9 * a);
}

#[test]
fn solve_reads_a_constraint_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "fx", &["--profile", "dominated-fixture", "--seed", "2"]);
    let sidecar = dir.path().join("fx.constraints.json");
    let out = idd(&["analyze", inst.to_str().unwrap(), "--out", sidecar.to_str().unwrap()]);
    assert!(out.status.success());
    let with = json(&idd(&["solve", inst.to_str().unwrap(), "--algo", "exact", "--constraints", sidecar.to_str().unwrap()]));
    let without = json(&idd(&["solve", inst.to_str().unwrap(), "--algo", "exact", "--no-constraints"]));
    let (a, b) = (with["objective"].as_f64().unwrap(), without["objective"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-9 * a);
}

#[test]
fn seeded_vns_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "tpch", &["--profile", "tpch-like", "--seed", "4"]);
    let args = ["solve", inst.to_str().unwrap(), "--algo", "vns", "--seed", "7", "--deadline", "1", "--no-constraints"];
    let a = idd(&args);
    let b = idd(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solve_writes_curve_and_timeline() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "small", &["--profile", "custom", "--indexes", "6", "--seed", "1"]);
    let curve = dir.path().join("curve.csv");
    let timeline = dir.path().join("timeline.csv");
    let out = idd(&[
        "solve",
        inst.to_str().unwrap(),
        "--algo",
        "tabu-fswap",
        "--deadline",
        "0.2",
        "--curve",
        curve.to_str().unwrap(),
        "--timeline",
        timeline.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = std::fs::read_to_string(curve).unwrap();
    assert!(curve.starts_with("step,index_id,start_time_s,build_cost_s,runtime_after_s,cumulative_objective\n"));
    assert_eq!(curve.lines().count(), 7);
    let timeline = std::fs::read_to_string(timeline).unwrap();
    assert!(timeline.starts_with("elapsed_seconds,objective\n"));
}

#[test]
fn solve_starts_from_a_given_order() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "compete", &["--profile", "compete"]);
    let start = dir.path().join("start.json");
    std::fs::write(&start, "[0, 1]").unwrap();
    let sol = json(&idd(&[
        "solve",
        inst.to_str().unwrap(),
        "--algo",
        "tabu-bswap",
        "--start",
        start.to_str().unwrap(),
        "--deadline",
        "0.1",
    ]));
    assert_eq!(sol["stats"]["incumbent_timeline"][0][1].as_f64(), Some(3850.0));
    assert!((sol["objective"].as_f64().unwrap() - 3800.0).abs() < 1e-9);
}

#[test]
fn node_limit_reports_an_unproven_seed() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "tpch", &["--profile", "tpch-like", "--seed", "1"]);
    let out = idd(&["solve", inst.to_str().unwrap(), "--algo", "exact", "--no-constraints", "--max-nodes", "1"]);
    // The greedy seed is the incumbent, so there is a solution but no proof.
    assert_eq!(out.status.code(), Some(0));
    let sol = json(&out);
    assert_eq!(sol["proven"], serde_json::json!(false));
    assert_eq!(sol["order"].as_array().unwrap().len(), 31);
}

#[test]
fn bench_emits_one_row_per_instance_and_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    for p in ["compete", "build", "alliance"] {
        gen(&corpus, p, &["--profile", p]);
    }
    let out = idd(&["bench", corpus.to_str().unwrap(), "--algos", "greedy,dp"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,algorithm,objective,time_to_best_s,nodes,proven"));
    assert_eq!(lines.count(), 6);

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(idd(&["bench", empty.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn bench_greedy_beats_random_on_generated_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..3 {
        gen(dir.path(), &format!("tpch{seed}"), &["--profile", "tpch-like", "--seed", &seed.to_string()]);
    }
    let out = idd(&["bench", dir.path().to_str().unwrap(), "--algos", "greedy,random"]);
    let mut greedy = 0.0;
    let mut random = 0.0;
    for line in stdout(&out).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let obj: f64 = cols[2].parse().unwrap();
        match cols[1] {
            "greedy" => greedy += obj,
            "random" => random += obj,
            other => panic!("unexpected algorithm {other}"),
        }
    }
    assert!(greedy < random);
}

#[test]
fn curve_defaults_to_greedy_order() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "build", &["--profile", "build"]);
    let out = idd(&["curve", inst.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    let cum: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((cum - 3320.0).abs() < 1e-9);
}

#[test]
fn gen_is_seeded() {
    let a = idd(&["gen", "--profile", "tpch-like", "--seed", "9"]);
    let b = idd(&["gen", "--profile", "tpch-like", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let inst = json(&a);
    assert_eq!(inst["indexes"].as_array().unwrap().len(), 31);
}
