use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roadgnn"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const LINE: &str = "4 6\n0 0 0\n1 1 0\n2 2 0\n3 3 0\n0 1 1\n1 0 1\n1 2 1\n2 1 1\n2 3 1\n3 2 1\n";

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("line.txt"), LINE).unwrap();
    fs::write(dir.path().join("mask.txt"), "# wet\n1 1\n").unwrap();
    fs::write(dir.path().join("shelters.txt"), "3\n").unwrap();
    dir
}

fn p(dir: &Path, f: &str) -> String {
    dir.join(f).to_str().unwrap().to_string()
}

#[test]
fn unknown_preset_exits_2() {
    let dir = setup();
    let o = run(dir.path(), &["gen", "--preset", "7k"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_edge_list_exits_2() {
    let dir = setup();
    fs::write(dir.path().join("bad.txt"), "2 1\n0 0 0\n1 1 0\n0 1 -3\n").unwrap();
    let o = run(dir.path(), &["route", "--graph", &p(dir.path(), "bad.txt"), "--from", "0", "--to", "1", "--backend", "exact"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.txt:4:"));
}

#[test]
fn mask_out_of_range_exits_2() {
    let dir = setup();
    fs::write(dir.path().join("mask.txt"), "9 1\n").unwrap();
    let o = run(
        dir.path(),
        &["flood", "--before", &p(dir.path(), "line.txt"), "--mask", &p(dir.path(), "mask.txt"), "--shelters", &p(dir.path(), "shelters.txt")],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_speed_factor_exits_2() {
    let dir = setup();
    let o = run(
        dir.path(),
        &[
            "flood", "--before", &p(dir.path(), "line.txt"), "--mask", &p(dir.path(), "mask.txt"),
            "--shelters", &p(dir.path(), "shelters.txt"), "--speed-factor", "1.5",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn gnn_without_model_exits_2() {
    let dir = setup();
    let o = run(dir.path(), &["route", "--graph", &p(dir.path(), "line.txt"), "--from", "0", "--to", "3"]);
    assert_eq!(code(&o), 2);
    let o = run(dir.path(), &["bench", "--methods", "gnn", "--queries", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn route_node_out_of_range_exits_2() {
    let dir = setup();
    let o = run(dir.path(), &["route", "--graph", &p(dir.path(), "line.txt"), "--from", "0", "--to", "4", "--backend", "exact"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exact_route_prints_cumulative_weights() {
    let dir = setup();
    let o = run(dir.path(), &["route", "--graph", &p(dir.path(), "line.txt"), "--from", "0", "--to", "3", "--backend", "exact"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(out.lines().next(), Some("step,node,cumulative"));
    assert_eq!(rows, vec![vec![0., 0., 0.], vec![1., 1., 1.], vec![2., 2., 2.], vec![3., 3., 3.]]);
}

#[test]
fn exact_flood_matches_hand_computed_ratios() {
    let dir = setup();
    let o = run(
        dir.path(),
        &[
            "flood", "--before", &p(dir.path(), "line.txt"), "--mask", &p(dir.path(), "mask.txt"),
            "--shelters", &p(dir.path(), "shelters.txt"), "--label", "wet",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Edges touching node 1 run three times slower: 0 -> 3 costs 3+3+1, 1 -> 3 costs 3+1.
    let want = [7.0 / 3.0, 2.0, 1.0, 1.0];
    let text = fs::read_to_string(dir.path().join("delta.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node,delta"));
    for (line, w) in lines.zip(want) {
        let d: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((d - w).abs() < 1e-12, "{line}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let mean = want.iter().sum::<f64>() / 4.0;
    assert!((summary["mean"].as_f64().unwrap() - mean).abs() < 1e-12, "{summary}");
    assert!(dir.path().join("histogram.csv").exists());
}

#[test]
fn gen_writes_graph_and_config() {
    let dir = setup();
    let o = run(dir.path(), &["--seed", "5", "gen", "--preset", "1k", "--name", "g"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = roadgnn::Graph::load_edge_list(dir.path().join("g.txt")).unwrap();
    assert!(g.node_count() > 500);
    assert!(dir.path().join("g.json").exists());
}
