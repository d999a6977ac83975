//! End-to-end tests of the binary: every subcommand on small fixtures, plus
//! the documented exit codes (0 ok, 2 config, 3 i/o, 4 verification).

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coreset"))
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coreset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn generate_solve_estimate_roundtrip() {
    let dir = workdir();
    let gpath = dir.join("g.txt");
    let out = run(&[
        "generate",
        "--kind",
        "graph",
        "--n",
        "64",
        "--delta-exp",
        "0.6",
        "--seed",
        "3",
        "--out",
        gpath.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["n"], 64);

    let out = run(&[
        "solve",
        "--input",
        gpath.to_str().unwrap(),
        "--solver",
        "local-search:5",
        "--seed",
        "2",
    ]);
    let v = stdout_json(&out);
    assert!(v["value"].as_f64().unwrap() > 0.0);

    let out = run(&[
        "estimate",
        "--input",
        gpath.to_str().unwrap(),
        "--gamma",
        "0.15",
        "--seed",
        "4",
    ]);
    let v = stdout_json(&out);
    assert!(v["value"].as_f64().unwrap() >= 0.0);
}

#[test]
fn solve_k4_exact_prints_four() {
    let dir = workdir();
    let path = dir.join("k4.txt");
    std::fs::write(&path, "graph 4\n0 1 1\n0 2 1\n0 3 1\n1 2 1\n1 3 1\n2 3 1\n").unwrap();
    let out = run(&[
        "solve",
        "--input",
        path.to_str().unwrap(),
        "--solver",
        "exact",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["value"], 4.0);
}

#[test]
fn coreset_and_stream_commands() {
    let dir = workdir();
    let gpath = dir.join("g2.txt");
    run(&[
        "generate",
        "--kind",
        "graph",
        "--n",
        "128",
        "--delta-exp",
        "0.7",
        "--seed",
        "5",
        "--out",
        gpath.to_str().unwrap(),
        "--stream-order",
        "insert-delete-mix",
    ]);
    let hpath = dir.join("h.txt");
    let out = run(&[
        "coreset",
        "--input",
        gpath.to_str().unwrap(),
        "--epsilon",
        "0.3",
        "--c-const",
        "0.05",
        "--seed",
        "9",
        "--out",
        hpath.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert!(v["vertices"].as_u64().unwrap() > 0);
    assert!(hpath.exists());
    let sidecar = dir.join("h.txt.meta.json");
    assert!(sidecar.exists(), "sidecar metadata written");

    let spath = format!("{}.stream", gpath.display());
    let out = run(&[
        "stream",
        "--from-stream",
        &spath,
        "--epsilon",
        "0.3",
        "--c-const",
        "0.05",
        "--solver",
        "local-search:3",
        "--seed",
        "6",
    ]);
    let v = stdout_json(&out);
    assert!(v["value"].as_f64().unwrap() > 0.0);
    assert!(v["coreset_vertices"].as_u64().unwrap() > 0);
}

#[test]
fn experiment_writes_reports_deterministically() {
    let dir = workdir();
    let out_base = dir.join("rep");
    let args = [
        "experiment",
        "--set",
        "n=96",
        "--set",
        "trials=2",
        "--set",
        "c_const=0.08",
        "--set",
        "solver=local-search:3",
        "--set",
        "rng_seed=11",
    ];
    let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    full.push("--set".into());
    full.push(format!("output={}", out_base.display()));
    let out = bin().args(&full).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv1 = std::fs::read_to_string(format!("{}.csv", out_base.display())).unwrap();
    assert!(std::path::Path::new(&format!("{}.json", out_base.display())).exists());

    // Same config + seed: byte-identical rows apart from the wall-clock
    // columns (baseline_ms, pipeline_ms).
    let out = bin().args(&full).output().unwrap();
    assert!(out.status.success());
    let csv2 = std::fs::read_to_string(format!("{}.csv", out_base.display())).unwrap();
    let strip = |text: &str| -> Vec<Vec<String>> {
        text.lines()
            .map(|l| {
                l.split(',')
                    .enumerate()
                    .filter(|&(i, _)| i != 7 && i != 8)
                    .map(|(_, f)| f.to_string())
                    .collect()
            })
            .collect()
    };
    assert_eq!(strip(&csv1), strip(&csv2));

    // The emitted config file replays losslessly.
    let cfg_path = format!("{}.config", out_base.display());
    let out = run(&["experiment", "--config", &cfg_path]);
    assert!(out.status.success());
}

#[test]
fn exit_codes_are_distinct() {
    // Config error: range violation.
    let out = run(&["generate", "--kind", "graph", "--n", "1", "--out", "/tmp/x.txt"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    // Unknown flag: clap usage error, also 2.
    let out = run(&["solve", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    // I/O error: unreadable file.
    let out = run(&["solve", "--input", "/nonexistent/g.txt"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // Bad config file content.
    let dir = workdir();
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "epsilon = 7\n").unwrap();
    let out = run(&["experiment", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_quick_passes() {
    let out = run(&["verify", "--quick"]);
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("all") && text.contains("suites passed"));
}

#[test]
fn signed_instances_through_cli() {
    let dir = workdir();
    let spath = dir.join("cc.txt");
    run(&[
        "generate",
        "--kind",
        "cc",
        "--n",
        "10",
        "--clusters",
        "2",
        "--noise",
        "0.0",
        "--seed",
        "1",
        "--out",
        spath.to_str().unwrap(),
    ]);
    let out = run(&[
        "solve",
        "--input",
        spath.to_str().unwrap(),
        "--solver",
        "exact",
        "--clusters",
        "2",
    ]);
    let v = stdout_json(&out);
    // Planted noiseless instance: optimum equals the edge count.
    assert_eq!(v["value"], 45.0);

    let out = run(&[
        "estimate",
        "--input",
        spath.to_str().unwrap(),
        "--gamma",
        "1.0",
        "--clusters",
        "2",
        "--mode",
        "sampled:64",
        "--seed",
        "3",
    ]);
    let v = stdout_json(&out);
    assert!(v["value"].as_f64().unwrap() <= 45.0 + 1e-6);
}
