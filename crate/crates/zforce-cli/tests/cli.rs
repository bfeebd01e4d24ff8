//! End-to-end tests of the `zforce` binary: exit codes, file round-trips,
//! and the shape of each subcommand's output.

use std::fs;
use std::io::Cursor;
use std::path::Path;
use std::process::{Command, Output};

use zforce::graph::read_edge_list;

fn zforce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zforce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_greedy_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.el");
    let args = ["gen", "--n", "60", "--d", "3", "--seed", "11"];
    let to_file = zforce(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(to_file.status.success());
    let written = fs::read(&path).unwrap();

    let to_stdout = zforce(&args);
    assert!(to_stdout.status.success());
    assert_eq!(written, to_stdout.stdout);

    let reparsed = read_edge_list(Cursor::new(&written))
        .unwrap()
        .to_edge_list_string();
    assert_eq!(written, reparsed.into_bytes());

    let greedy = zforce(&[
        "greedy",
        "--graph",
        path.to_str().unwrap(),
        "--algo",
        "plain",
        "--seed",
        "5",
    ]);
    let summary = stdout_json(&greedy);
    assert_eq!(summary["n"], 60);
    assert_eq!(summary["d"], 3);
    assert_eq!(summary["status"], "complete");
    assert!(summary["b_size"].as_u64().unwrap() >= 2);
}

#[test]
fn force_reports_the_forced_order_of_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p4.el");
    fs::write(&path, "4 3 2\n0 1\n1 2\n2 3\n").unwrap();
    let out = zforce(&["force", "--graph", path.to_str().unwrap(), "--set", "0"]);
    let v = stdout_json(&out);
    assert_eq!(v["forces"], serde_json::json!([[0, 1], [1, 2], [2, 3]]));
    assert_eq!(v["final_black"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(v["stalled"], false);
}

#[test]
fn exact_on_a_path_and_the_complement_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p5.el");
    fs::write(&path, "5 4 2\n0 1\n1 2\n2 3\n3 4\n").unwrap();
    let v = stdout_json(&zforce(&["exact", "--graph", path.to_str().unwrap()]));
    assert_eq!(v["zero_forcing_number"], 1);
    assert_eq!(v["sum"], 5);
}

#[test]
fn ode_smart_bound_and_trajectory_files() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj");
    let out = zforce(&[
        "ode",
        "--d",
        "3",
        "--algo",
        "smart",
        "--traj-dir",
        traj.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    let bound = v["upper_bound"].as_f64().unwrap();
    assert!((bound - 0.17057).abs() < 2e-4, "bound {bound}");
    for phase in ["phase1.csv", "phase2.csv"] {
        let text = fs::read_to_string(traj.join(phase)).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("x,y0_1,"), "header {header}");
        assert!(text.lines().count() > 10);
    }
}

#[test]
fn lower_bound_writes_the_threshold_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t2.csv");
    let out = zforce(&[
        "lower-bound",
        "--d",
        "3:14",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 13);
    assert_eq!(lines[0], "d,a,lower_bound");
    assert!(lines[1].starts_with("3,0.46503"), "{}", lines[1]);
    assert!(lines[12].starts_with("14,0.24146"), "{}", lines[12]);
}

#[test]
fn spectral_reports_bounds_and_finds_holes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("petersen.el");
    let petersen = zforce::graph::RegularGraph::petersen();
    fs::write(&path, petersen.to_edge_list_string()).unwrap();
    let v = stdout_json(&zforce(&[
        "spectral",
        "--graph",
        path.to_str().unwrap(),
        "--q",
        "2",
    ]));
    assert_eq!(v["n"], 10);
    assert_eq!(v["lambda_source"], "computed");
    assert!((v["lambda"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["holes_found"]["found"], true);
    assert_eq!(v["holes_found"]["u"].as_array().unwrap().len(), 2);

    let v = stdout_json(&zforce(&["spectral", "--n", "10000", "--d", "4"]));
    assert_eq!(v["lambda_source"], "friedman");
    assert!(v["bound_exact"].as_f64().unwrap() < 10000.0);
}

#[test]
fn mc_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    let summary = dir.path().join("summary.json");
    let out = zforce(&[
        "mc",
        "--n",
        "300",
        "--d",
        "3",
        "--samples",
        "4",
        "--seed",
        "5",
        "--records",
        records.to_str().unwrap(),
        "--out",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let lines: Vec<serde_json::Value> = fs::read_to_string(&records)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    for (i, r) in lines.iter().enumerate() {
        assert_eq!(r["index"], i);
        assert_eq!(r["seed"], 5 + i as u64);
    }

    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["config"]["samples"], 4);
    let mean = s["mean_b_frac"].as_f64().unwrap();
    assert!((0.1..0.3).contains(&mean), "mean {mean}");
}

#[test]
fn compare_self_consistency_on_a_small_run() {
    let v = stdout_json(&zforce(&[
        "compare",
        "--n",
        "2000",
        "--d",
        "3",
        "--samples",
        "1",
        "--seed",
        "2",
    ]));
    let sup = v["max_sup"].as_array().unwrap();
    assert_eq!(sup.len(), 3);
    assert!(sup.iter().all(|s| s.as_f64().unwrap() < 0.2));
}

#[test]
fn exit_codes_follow_the_contract() {
    let bad_degree = zforce(&["ode", "--d", "2"]);
    assert_eq!(bad_degree.status.code(), Some(2));

    let missing_file = zforce(&["exact", "--graph", "/nonexistent/no.el"]);
    assert_eq!(missing_file.status.code(), Some(2));

    let unknown_flag = zforce(&["ode", "--d", "3", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(64));

    let help = zforce(&["--help"]);
    assert_eq!(help.status.code(), Some(0));

    let odd_product = zforce(&["gen", "--n", "5", "--d", "3"]);
    assert_eq!(odd_product.status.code(), Some(2));
}

#[test]
fn replayed_seed_reproduces_the_recorded_size() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    let out = zforce(&[
        "mc",
        "--n",
        "250",
        "--d",
        "4",
        "--samples",
        "3",
        "--seed",
        "40",
        "--records",
        records.to_str().unwrap(),
        "--out",
        dir.path().join("s.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for line in fs::read_to_string(&records).unwrap().lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        let seed = r["seed"].as_u64().unwrap();
        let v = stdout_json(&zforce(&[
            "greedy",
            "--n",
            "250",
            "--d",
            "4",
            "--seed",
            &seed.to_string(),
        ]));
        assert_eq!(v["b_size"], r["b_size"], "seed {seed}");
    }
}

#[test]
fn thread_count_does_not_change_the_records_file() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| -> String {
        let records = dir.path().join(name);
        let out = zforce(&[
            "mc",
            "--n",
            "200",
            "--d",
            "3",
            "--samples",
            "6",
            "--seed",
            "77",
            "--threads",
            threads,
            "--records",
            records.to_str().unwrap(),
            "--out",
            dir.path().join("s.json").to_str().unwrap(),
        ]);
        assert!(out.status.success());
        strip_runtimes(&records)
    };
    assert_eq!(run("1", "a.jsonl"), run("8", "b.jsonl"));
}

fn strip_runtimes(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("runtime_ms");
            v.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}
