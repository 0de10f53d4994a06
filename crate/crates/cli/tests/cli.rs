use std::path::Path;
use std::process::{Command, Output};

use jumppat::algebra::{Tolerances, C64};
use jumppat::channel::ChannelProcess;
use jumppat::model::{build_xy_chain, ChainSpec};
use jumppat::trajectory::{simulate_stream, SimulationOptions};

fn jumppat(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jumppat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("JUMPPAT_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = jumppat(args, out);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str], out: &Path) -> i32 {
    jumppat(args, out).status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn stats_order_two_for_two_sites() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["stats", "--chain", "xx", "--L", "2", "--gamma", "1", "--order", "2"], dir.path());
    let dist = read(dir.path(), "distribution_2.csv");
    assert!(dist.lines().any(|l| l == "EI,0.375"), "{dist}");
    assert!(dist.lines().any(|l| l == "EE,0.125"));
    assert_eq!(read(dir.path(), "single_outcome.csv"), "symbol,probability\nE,0.5\nI,0.5\n");
}

#[test]
fn bare_length_means_xx_chain() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["stats", "--L", "2"], a.path());
    ok(&["stats", "--chain", "xx", "--L", "2"], b.path());
    assert_eq!(read(a.path(), "distribution_2.csv"), read(b.path(), "distribution_2.csv"));
}

#[test]
fn stats_mutual_information_single_site() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["stats", "--chain", "xx", "--L", "1", "--gamma", "1", "--mi-max", "4"], dir.path());
    let mi = read(dir.path(), "mutual_information.csv");
    let row: Vec<&str> = mi.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert!((row[1].parse::<f64>().unwrap() - std::f64::consts::LN_2).abs() < 1e-10);
    assert_eq!(mi.lines().count(), 4);
}

#[test]
fn stats_is_byte_identical_across_runs_and_modes_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["stats", "--chain", "xx", "--L", "2", "--gamma", "1/2", "--order", "3", "--mi-max", "5"];
    ok(&args, a.path());
    ok(&args, b.path());
    for f in ["single_outcome.csv", "distribution_3.csv", "two_point.csv", "mutual_information.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f));
    }
    let mut exact = args.to_vec();
    exact.extend(["--mode", "exact"]);
    ok(&exact, c.path());
    let parse = |s: String| -> Vec<f64> {
        s.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
    };
    let fa = parse(read(a.path(), "distribution_3.csv"));
    let fc = parse(read(c.path(), "distribution_3.csv"));
    assert!(fa.iter().zip(&fc).all(|(x, y)| (x - y).abs() < 1e-10));
}

#[test]
fn two_point_table_compares_spectral_form() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["stats", "--chain", "xx", "--L", "3", "--two-point-max", "6", "--mi-max", "2"], dir.path());
    let table = read(dir.path(), "two_point.csv");
    assert_eq!(table.lines().next(), Some("n,k1,kn,direct,spectral,difference"));
    assert_eq!(table.lines().count(), 1 + 5 * 4);
    for line in table.lines().skip(1) {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff < 1e-9, "{line}");
    }
}

#[test]
fn simulate_deterministic_single_site() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["simulate", "--chain", "xx", "--L", "1", "--seed", "7", "--steps", "6", "--initial", "1"], dir.path());
    assert_eq!(out, "EIEIEI\n");
    assert_eq!(read(dir.path(), "symbols.txt"), "EIEIEI\n");
}

#[test]
fn simulate_ensemble_follows_stream_split() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--chain", "xx", "--L", "2", "--seed", "11", "--steps", "30", "--trajectories", "10"];
    let first = ok(&args, dir.path());
    let second = ok(&args, dir.path());
    assert_eq!(first, second);
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 10);
    let p = ChannelProcess::build(&build_xy_chain::<C64>(&ChainSpec::xx(2, 1.0)).unwrap(), Tolerances::default()).unwrap();
    for (i, line) in lines.iter().enumerate() {
        let r = simulate_stream(&p, &SimulationOptions::new(30), 11, i as u64, None).unwrap();
        assert_eq!(*line, r.symbol_string(p.alphabet()));
    }
}

#[test]
fn simulate_dumps_states_on_request() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--chain", "xx", "--L", "1", "--seed", "1", "--steps", "4", "--keep-states"], dir.path());
    let states = read(dir.path(), "states_0.jsonl");
    assert_eq!(states.lines().count(), 5);
    let v: serde_json::Value = serde_json::from_str(states.lines().last().unwrap()).unwrap();
    assert_eq!(v["dim"], 2);
}

#[test]
fn patterns_two_sites_closed() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["patterns", "--chain", "xx", "--L", "2", "--gamma", "1", "--seed", "3"], dir.path());
    assert_eq!(out.lines().next(), Some("classification: closed"));
    let dot = read(dir.path(), "pattern.dot");
    assert_eq!(dot.lines().filter(|l| l.contains("[label=\"|")).count(), 3);
    assert_eq!(dot.lines().filter(|l| l.contains(" -> ")).count(), 4);
    assert!(read(dir.path(), "labels_0.csv").starts_with("step,label\n0,1\n"));
}

#[test]
fn patterns_single_site_renewal_and_three_sites_recurring() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["patterns", "--chain", "xx", "--L", "1", "--seed", "0"], dir.path());
    assert!(out.starts_with("classification: renewal\n"));
    let out = ok(&["patterns", "--chain", "xx", "--L", "3", "--seed", "0"], dir.path());
    assert!(out.starts_with("classification: recurring\n"), "{out}");
}

#[test]
fn patterns_pairing_chain_open() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        &["patterns", "--chain", "xy", "--L", "3", "--gamma", "1", "--kappa", "1/2", "--seed", "0", "--trials", "4"],
        dir.path(),
    );
    assert!(out.starts_with("classification: open\n"), "{out}");
}

#[test]
fn patterns_refuse_float_mode() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["patterns", "--chain", "xx", "--L", "2", "--seed", "0", "--mode", "float"], dir.path()), 2);
}

#[test]
fn cluster_writes_graphs_and_quality() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "cluster", "--chain", "xy", "--L", "3", "--gamma", "1", "--kappa", "0.5", "--nc", "4,12", "--samples", "300",
        "--burn-in", "50", "--horizon", "4", "--seed", "5",
    ];
    ok(&args, dir.path());
    let dot = read(dir.path(), "cluster_graph_nc12.dot");
    assert_eq!(dot.lines().filter(|l| l.contains("[label=\"C")).count(), 12);
    assert!(dot.lines().filter(|l| l.contains(" -> ")).count() <= 12 * 2);
    assert!(dir.path().join("cluster_graph_nc4.dot").exists());
    let quality = read(dir.path(), "quality.csv");
    assert!(quality.starts_with("n_clusters,max_intra_distance"));
    assert_eq!(quality.lines().count(), 3);
    let assignment = read(dir.path(), "assignment_nc12.csv");
    assert_eq!(assignment.lines().count(), 301);
    let again = tempfile::tempdir().unwrap();
    ok(&args, again.path());
    assert_eq!(assignment, read(again.path(), "assignment_nc12.csv"));
}

#[test]
fn cluster_single_cluster_graph() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["cluster", "--chain", "xx", "--L", "2", "--nc", "1", "--samples", "50", "--horizon", "3", "--seed", "1"], dir.path());
    let dot = read(dir.path(), "cluster_graph_nc1.dot");
    assert_eq!(dot.lines().filter(|l| l.contains("[label=\"C")).count(), 1);
    assert!(read(dir.path(), "assignment_nc1.csv").lines().skip(1).all(|l| l.ends_with(",1")));
}

#[test]
fn likelihood_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["likelihood", "EE", "--chain", "xx", "--L", "1"], dir.path());
    assert_eq!(out, "rank,model,log_likelihood,impossible\n1,xx L=1,-inf,true\n");
    let out = ok(&["likelihood", "EIIEEIEIEEIIEIE", "--chain", "xx", "--L", "2", "--lengths", "2,3"], dir.path());
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][1], "xx L=3");
    assert!(rows[0][2].parse::<f64>().unwrap().is_finite());
    // Two-site chains cannot emit E twice after reaching |00⟩ by E, I: the
    // string is outside its language.
    assert_eq!(rows[1][1..], ["xx L=2", "-inf", "true"]);
    assert_eq!(code(&["likelihood", "", "--chain", "xx", "--L", "1"], dir.path()), 2);
    assert_eq!(code(&["likelihood", "EXE", "--chain", "xx", "--L", "1"], dir.path()), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["stats", "--chain", "xx", "--L", "3", "--order", "20"], dir.path()), 4);
    assert_eq!(code(&["simulate", "--chain", "xx", "--L", "1"], dir.path()), 2);
    assert_eq!(code(&["stats", "--chain", "xx"], dir.path()), 2);
    assert_eq!(code(&["stats", "--L", "2", "--chain", "xx", "--gamma", "abc"], dir.path()), 2);
    assert_eq!(code(&["stats", "--chain", "xx", "--L", "2", "--monitored", "Q"], dir.path()), 2);
    // A decaying qubit never leaves |0⟩ without a click: dark subspace.
    let model = r#"{"hamiltonian": {"dim": 2, "entries": [[0,0],[0,0],[0,0],[0,0]]},
        "jumps": [{"label": "E", "operator": {"dim": 2, "entries": [[0,0],[0,0],[1,0],[0,0]]}}]}"#;
    std::fs::write(dir.path().join("dark.json"), model).unwrap();
    let path = dir.path().join("dark.json");
    assert_eq!(code(&["stats", "--model", path.to_str().unwrap()], dir.path()), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"model": {"chain": "xx", "length": 1, "gamma": "1"}, "seed": 7,
        "simulate": {"steps": 4, "initial": "1"}}"#;
    let path = dir.path().join("run.json");
    std::fs::write(&path, config).unwrap();
    let out = ok(&["simulate", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out, "EIEI\n");
    let out = ok(&["simulate", "--config", path.to_str().unwrap(), "--steps", "2"], dir.path());
    assert_eq!(out, "EI\n");
    std::fs::write(&path, r#"{"model": {"chain": "xx"}, "bogus": 1}"#).unwrap();
    assert_eq!(code(&["stats", "--config", path.to_str().unwrap()], dir.path()), 2);
}

#[test]
fn model_file_ingestion_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    // XX L=1: H = 0, E = σ⁻ at rate 1, I = σ⁺ at rate 1; index 0 is occupied.
    let model = r#"{"hamiltonian": {"dim": 2, "entries": [["0","0"],["0","0"],["0","0"],["0","0"]]},
        "jumps": [
          {"label": "E", "rate": "1", "operator": {"dim": 2, "entries": [["0","0"],["0","0"],["1","0"],["0","0"]]}},
          {"label": "I", "rate": 1, "operator": {"dim": 2, "entries": [["0","0"],["1","0"],["0","0"],["0","0"]]}}]}"#;
    let path = dir.path().join("m.json");
    std::fs::write(&path, model).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["stats", "--model", path.to_str().unwrap(), "--mode", "exact"], &a);
    ok(&["stats", "--chain", "xx", "--L", "1"], &b);
    assert_eq!(read(&a, "distribution_2.csv"), read(&b, "distribution_2.csv"));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_jumppat"))
        .args(["stats", "--chain", "xx", "--L", "1", "--out"])
        .arg(dir.path())
        .env("JUMPPAT_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_jumppat"))
        .args(["stats", "--chain", "xx", "--L", "1", "--out"])
        .arg(dir.path())
        .env("JUMPPAT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
