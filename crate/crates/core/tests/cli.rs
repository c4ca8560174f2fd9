use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coarsekit"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

/// Labels as sorted `(point, color, piece)` triples, whatever the spelling.
fn labels(w: &Value) -> Vec<(String, u64, u64)> {
    let mut out: Vec<(String, u64, u64)> = w["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| {
            let p = match &l[0] {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            (p, l[1].as_u64().unwrap(), l[2].as_u64().unwrap())
        })
        .collect();
    out.sort();
    out
}

fn line_space() -> Value {
    json!({"id": "line", "points": [0, 1, 2, 3], "edges": [[0, 1], [1, 2], [2, 3]]})
}

#[test]
fn p10_witness_verifies() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert!(run(d, &["gen-space", "path", "--n", "10", "--out", "p10.json"]).status.success());
    let out = run(d, &["search", "--space", "p10.json", "--r", "2", "--D", "3", "--mode", "exhaustive", "--out", "w.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(d, "w.json")["k"], 2);
    let out = run(d, &["verify", "--witness", "w.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], true);
}

#[test]
fn three_not_greater_than_three() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let w = json!({
        "spaces": [line_space()],
        "space": {"ambient": "line", "points": [0, 3]},
        "k": 1, "r": 3,
        "labels": [[0, 0, 0], [3, 0, 1]],
        "target": {"bounded": 0}
    });
    write(d, "bad.json", &w);
    let out = run(d, &["verify", "--witness", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("d(X_{0,0}, X_{0,1}) = 3 ≤ r = 3"), "{stdout}");
}

#[test]
fn gen_ball_free_group() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "f2.json", &json!({"variant": "free", "rank": 2}));
    let out = run(d, &["gen-ball", "--spec", "f2.json", "--N", "2"]);
    assert!(out.status.success());
    let space: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(space["points"].as_array().unwrap().len(), 17);
}

fn nine_point_kfold() -> Value {
    let names: Vec<u32> = (0..9).collect();
    let edges: Vec<[u32; 2]> = (0..8).map(|i| [i, i + 1]).collect();
    json!({
        "spaces": [{"id": "P9", "points": names, "edges": edges}],
        "space": {"ambient": "P9", "points": names},
        "k": 3, "r": 2,
        "labels": [[0,0,0],[1,0,0],[5,0,1],[6,0,1],[2,1,0],[3,1,0],[4,2,0],[7,2,1],[8,2,1]],
        "target": {"bounded": 1}
    })
}

#[test]
fn chain_from_kfold_writes_three_steps() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "w.json", &nine_point_kfold());
    let out = run(d, &["transform", "chain-from-kfold", "--input", "w.json", "--out", "c.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(d, "c.json")["steps"].as_array().unwrap().len(), 3);
    assert_eq!(run(d, &["verify", "c.json"]).status.code(), Some(0));
}

#[test]
fn pad_to_same_k_keeps_pieces() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "w.json", &nine_point_kfold());
    assert!(run(d, &["transform", "pad", "--input", "w.json", "--k", "3", "--out", "p.json"]).status.success());
    assert_eq!(labels(&read(d, "p.json")), labels(&read(d, "w.json")));
    assert!(run(d, &["transform", "pad", "--input", "w.json", "--k", "5", "--out", "p5.json"]).status.success());
    assert_eq!(read(d, "p5.json")["k"], 5);
    assert_eq!(run(d, &["transform", "pad", "--input", "w.json", "--k", "2", "--out", "p2.json"]).status.code(), Some(1));
    assert!(!d.join("p2.json").exists());
}

#[test]
fn string_with_mismatched_families_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "w.json", &nine_point_kfold());
    assert!(run(d, &["transform", "chain-from-kfold", "--input", "w.json", "--out", "c.json"]).status.success());
    let tail = json!({
        "spaces": [line_space()],
        "start": [{"ambient": "line", "points": [0, 1, 2, 3]}],
        "steps": [],
        "final_bound": 3
    });
    write(d, "tail.json", &tail);
    let out = run(d, &["transform", "string", "--head", "c.json", "--tail", "tail.json", "--out", "s.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("s.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(d, &["verify", "missing.json"]).status.code(), Some(2));
    assert_eq!(run(d, &["search", "--space", "missing.json", "--r", "1", "--D", "1"]).status.code(), Some(2));
    write(d, "w.json", &nine_point_kfold());
    let out = run(d, &["transform", "pad", "--input", "w.json", "--k", "3", "--out", "w.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn rel_ball_restrict_and_union_assemble() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let spec = json!({"variant": "free_product", "factors": [{"variant": "free_abelian", "rank": 1}, {"variant": "free_abelian", "rank": 1}]});
    write(d, "zz.json", &spec);
    assert!(run(d, &["rel-ball", "--spec", "zz.json", "--N", "3", "--n", "1", "--out", "b1.json"]).status.success());
    let ball = read(d, "b1.json");
    assert_eq!(ball["points"].as_array().unwrap().len(), 13);

    // the word-metric window as a space, decomposed, then restricted to B(1)
    assert!(run(d, &["gen-ball", "--spec", "zz.json", "--N", "3", "--out", "w3.json"]).status.success());
    let out = run(d, &["search", "--space", "w3.json", "--r", "1", "--D", "2", "--mode", "heuristic", "--max-k", "8", "--out", "h.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(d, &["transform", "restrict", "--input", "h.json", "--subspace", "b1.json", "--out", "hr.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(d, "hr.json")["space"]["points"].as_array().unwrap().len(), 13);

    // B(1) as Y with itself as the only part
    let out = run(d, &["transform", "union-assemble", "--part", "b1.json", "--y", "b1.json", "--r", "2", "--out", "u.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(run(d, &["verify", "u.json"]).status.code(), Some(0));
}

#[test]
fn merge_union_and_transfer() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let names: Vec<u32> = (0..6).collect();
    let edges: Vec<[u32; 2]> = (0..5).map(|i| [i, i + 1]).collect();
    let space = json!({"id": "P6", "points": names, "edges": edges});
    let left = json!({
        "spaces": [space], "space": {"ambient": "P6", "points": [0, 1, 2]},
        "k": 1, "r": 1, "labels": [[0, 0, 0], [1, 0, 0], [2, 0, 0]], "target": {"bounded": 2}
    });
    let right = json!({
        "spaces": [space], "space": {"ambient": "P6", "points": [2, 3, 4, 5]},
        "k": 2, "r": 1, "labels": [[2, 0, 0], [3, 0, 0], [4, 1, 0], [5, 1, 0]], "target": {"bounded": 2}
    });
    write(d, "a.json", &left);
    write(d, "b.json", &right);
    let out = run(d, &["transform", "merge-union", "--first", "a.json", "--second", "b.json", "--out", "m.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(d, "m.json")["space"]["points"].as_array().unwrap().len(), 6);

    let map = json!({
        "spaces": [space],
        "source": "P6", "target": "P6",
        "map": (0..6).map(|i| [i, i]).collect::<Vec<_>>(),
        "rho_plus": [[0, 0], [1, 1], [2, 2], [3, 3], [4, 4], [5, 5]], "rho_minus": [[0, 0], [1, 1], [2, 2], [3, 3], [4, 4], [5, 5]]
    });
    write(d, "id.json", &map);
    assert_eq!(run(d, &["verify", "id.json"]).status.code(), Some(0));
    let out = run(d, &["transform", "transfer", "--map", "id.json", "--input", "m.json", "--out", "t.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn export_dot_window() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let spec = json!({"variant": "free_product", "factors": [{"variant": "free_abelian", "rank": 1}, {"variant": "cyclic", "order": 3}]});
    write(d, "g.json", &spec);
    let out = run(d, &["export-dot", "--spec", "g.json", "--N", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("graph"));
    assert!(text.contains("style=dashed"));
    write(d, "line.json", &line_space());
    let out = run(d, &["export-dot", "--space", "line.json"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).matches(" -- ").count(), 3);
}

#[test]
fn profile_rows() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert!(run(d, &["gen-space", "grid", "--rows", "3", "--cols", "3", "--out", "g.json"]).status.success());
    let out = run(d, &["profile", "--space", "g.json", "--scales", "1,2", "--d-const", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[1]["k"], 3);
    assert_eq!(rows[1]["exact"], true);
}
