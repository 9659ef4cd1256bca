mod support;

use std::path::Path;
use std::process::{Command, Output};

use binpack::checker;
use binpack::io::{read_instance_file, read_solution};
use support::fixture;

fn binpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binpack"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_solve_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("gen.json");
    let out = binpack(&[
        "gen",
        "-d",
        "2",
        "-m",
        "12",
        "-n",
        "2",
        "--categories",
        "4",
        "--bin-dims",
        "20..30",
        "--item-dims",
        "3..8",
        "--seed",
        "4",
        "--capacities",
        "--priority",
        "-o",
        s(&inst),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let instance = read_instance_file(&inst).unwrap();
    assert_eq!(instance.item_count(), 12);

    let sol = dir.path().join("gen.sol.json");
    let out = binpack(&[
        "solve",
        s(&inst),
        "--seed",
        "1",
        "--restarts",
        "1",
        "--max-iter",
        "800",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(sol.exists(), "default output name");
    assert!(!out.stdout.is_empty());

    let solution = read_solution(&std::fs::read(&sol).unwrap(), &instance).unwrap();
    assert!(checker::check(&instance, &solution).unwrap().feasible);
    let out = binpack(&["check", s(&sol), s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["feasible"], serde_json::json!(true));
}

#[test]
fn check_reports_violations_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture("1dBPP_2");
    let sol = dir.path().join("s.json");
    let out = binpack(&[
        "solve",
        s(&inst),
        "--seed",
        "0",
        "--restarts",
        "1",
        "--max-iter",
        "500",
        "-o",
        s(&sol),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&sol).unwrap()).unwrap();
    // stack the second item on the first
    let first = doc["placements"][0]["position"].clone();
    let bin = doc["placements"][0]["bin"].clone();
    doc["placements"][1]["position"] = first;
    doc["placements"][1]["bin"] = bin;
    std::fs::write(&sol, serde_json::to_vec(&doc).unwrap()).unwrap();
    let out = binpack(&["check", s(&sol), s(&inst)]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["feasible"], serde_json::json!(false));
}

#[test]
fn exact_1d_on_3d_input_is_usage_error() {
    let out = binpack(&[
        "solve",
        s(&fixture("3dBPP_het_bins")),
        "--backend",
        "exact1d",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn exact_1d_backend_solves_1d_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("e.json");
    let out = binpack(&[
        "solve",
        s(&fixture("1dBPP_1")),
        "--backend",
        "exact1d",
        "-o",
        s(&sol),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&sol).unwrap()).unwrap();
    assert_eq!(doc["feasible"], serde_json::json!(true));
}

#[test]
fn convert_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("i.json");
    let txt = dir.path().join("i.txt");
    let src = fixture("3dBPP_real_world_1");
    assert_eq!(
        binpack(&["convert", s(&src), "-o", s(&json)]).status.code(),
        Some(0)
    );
    assert_eq!(
        binpack(&["convert", s(&json), "-o", s(&txt)]).status.code(),
        Some(0)
    );
    assert_eq!(
        read_instance_file(&txt).unwrap(),
        read_instance_file(&src).unwrap()
    );

    let sol = dir.path().join("i.sol.json");
    let out = binpack(&[
        "solve",
        s(&json),
        "--seed",
        "2",
        "--restarts",
        "1",
        "--max-iter",
        "400",
    ]);
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let svg = dir.path().join("i.svg");
    let out = binpack(&["render", s(&sol), s(&json), "-o", s(&svg)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(binpack(&[]).status.code(), Some(2));
    assert_eq!(binpack(&["--help"]).status.code(), Some(0));
    assert_eq!(
        binpack(&["solve", "x.json", "--deterministic"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        binpack(&["solve", "x.json", "--weights", "1,2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        binpack(&["solve", "/nonexistent/x.json"]).status.code(),
        Some(3)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "# d : 2\n# bins : 1\nbin 0 : 10\n").unwrap();
    let out = binpack(&["convert", s(&bad), "-o", s(&dir.path().join("o.json"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn unreachable_remote_exits_four() {
    let out = binpack(&[
        "solve",
        s(&fixture("1dBPP_2")),
        "--backend",
        "remote",
        "--endpoint",
        "http://127.0.0.1:9",
        "--time-limit",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4));
}
