use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn holetree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holetree")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json_file(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn gen_writes_instance_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let o = holetree(dir.path(), &["gen", "blowup", "--k", "4", "--n", "12", "--p", "0.5", "--seed", "7", "--out", "inst.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let inst = json_file(dir.path(), "inst.json");
    assert_eq!(inst["k"], 4);
    assert_eq!(inst["parts"].as_array().unwrap().len(), 4);
    let meta = json_file(dir.path(), "inst.meta.json");
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["part_size"], 12);
}

#[test]
fn factor_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&holetree(d, &["gen", "blowup", "--k", "4", "--n", "12", "--p", "0.5", "--seed", "7", "--out", "inst.json"])), 0);
    let o = holetree(d, &["factor", "--in", "inst.json", "--seed", "1", "--out", "out.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_file(d, "out.json")["factor"].as_array().unwrap().len(), 12);
    let v = holetree(d, &["verify", "--in", "inst.json", "--witness", "out.json"]);
    assert_eq!(code(&v), 0);
    let verdict: Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(verdict["passed"], true);

    // A tampered witness fails verification with exit 1.
    let mut w = json_file(d, "out.json");
    w["factor"].as_array_mut().unwrap().pop();
    std::fs::write(d.join("bad.json"), w.to_string()).unwrap();
    assert_eq!(code(&holetree(d, &["verify", "--in", "inst.json", "--witness", "bad.json"])), 1);
}

#[test]
fn space_barrier_has_no_factor() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&holetree(d, &["gen", "barrier", "--k", "4", "--n", "8", "--out", "b.json"])), 0);
    assert_eq!(code(&holetree(d, &["factor", "--in", "b.json"])), 1);
}

#[test]
fn embed_on_two_cliques_is_rejected_before_search() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let half = 20;
    let mut edges = Vec::new();
    for off in [0, half] {
        for i in 0..half {
            for j in i + 1..half {
                edges.push([off + i, off + j]);
            }
        }
    }
    std::fs::write(d.join("g.json"), serde_json::json!({ "n": 2 * half, "edges": edges }).to_string()).unwrap();
    assert_eq!(code(&holetree(d, &["gen", "tree", "--n", "40", "--profile", "path", "--out", "t.txt"])), 0);
    let o = holetree(d, &["embed", "--host", "g.json", "--tree", "t.txt"]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["outcome"]["type"], "rejected");
    assert_eq!(report["phases"].as_array().unwrap().len(), 1);
    assert_eq!(report["phases"][0]["name"], "preflight");
}

#[test]
fn embed_report_reverifies_offline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&holetree(d, &["--seed", "2", "gen", "graph", "--n", "200", "--out", "g.json"])), 0);
    assert_eq!(code(&holetree(d, &["--seed", "2", "gen", "tree", "--n", "200", "--profile", "star_heavy", "--out", "t.txt"])), 0);
    let o = holetree(d, &["--seed", "5", "embed", "--host", "g.json", "--tree", "t.txt", "--out", "r.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&holetree(d, &["verify", "--in", "g.json", "--witness", "r.json", "--tree", "t.txt"])), 0);
    // Same seed, same bytes.
    assert_eq!(code(&holetree(d, &["--seed", "5", "embed", "--host", "g.json", "--tree", "t.txt", "--out", "r2.json"])), 0);
    assert_eq!(std::fs::read(d.join("r.json")).unwrap(), std::fs::read(d.join("r2.json")).unwrap());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&holetree(d, &["embed", "--host", "g.json"])), 2);
    assert_eq!(code(&holetree(d, &["factor", "--in", "missing.json"])), 2);
    assert_eq!(code(&holetree(d, &["--format", "yaml", "bench"])), 2);
}

#[test]
fn bench_csv_has_a_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), r#"{"k": 12}"#).unwrap();
    let o = holetree(d, &["--config", "cfg.json", "--format", "csv", "bench", "--sizes", "200", "--profiles", "path,star_heavy"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("index,n,profile"));
}
