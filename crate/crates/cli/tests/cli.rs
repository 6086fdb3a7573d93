use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bblab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bblab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_run_check_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        bblab(d, &["gen", "cross", "--n", "3", "--out", "p.json"]).status.code(),
        Some(0)
    );
    let run = bblab(d, &["run", "--polytope", "p.json", "--tree-out", "t.json"]);
    assert_eq!(run.status.code(), Some(0));
    let report = json(&run);
    assert_eq!(report["status"], "proved_infeasible");
    assert_eq!(report["nodes"], 15);

    let check = bblab(d, &["check-tree", "--polytope", "p.json", "--tree", "t.json"]);
    assert_eq!(check.status.code(), Some(0));
    let cert = json(&check);
    assert_eq!(cert["result"]["verdict"], "yes");
    assert_eq!(cert["result"]["leaves"].as_array().unwrap().len(), 8);
    assert_eq!(cert["replayed"], true);

    std::fs::write(d.join("leaf.json"), r#"{"leaf": true}"#).unwrap();
    let bad = bblab(d, &["check-tree", "--polytope", "p.json", "--tree", "leaf.json"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["result"]["verdict"], "no");
}

#[test]
fn solves_and_separates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    bblab(d, &["gen", "packing", "--n", "4", "--k", "2", "--out", "p.json"]);
    std::fs::write(d.join("c.json"), r#"["1","1","1","1"]"#).unwrap();
    let run = bblab(
        d,
        &[
            "run",
            "--polytope",
            "p.json",
            "--objective",
            "c.json",
            "--tree-out",
            "t.json",
        ],
    );
    assert_eq!(json(&run)["value"], "1");
    let check = bblab(
        d,
        &[
            "check-tree",
            "--polytope",
            "p.json",
            "--tree",
            "t.json",
            "--objective",
            "c.json",
        ],
    );
    assert_eq!(check.status.code(), Some(0));
    assert_eq!(json(&check)["check"], "solves");

    bblab(d, &["gen", "cross", "--n", "2", "--out", "p2.json"]);
    std::fs::write(d.join("x.json"), r#"["1/2","1/2"]"#).unwrap();
    let single = r#"{"pi":["1","0"],"pi0":"0","left":{"leaf":true},"right":{"leaf":true}}"#;
    std::fs::write(d.join("t2.json"), single).unwrap();
    let sep = bblab(
        d,
        &[
            "check-tree",
            "--polytope",
            "p2.json",
            "--tree",
            "t2.json",
            "--point",
            "x.json",
        ],
    );
    assert_eq!(sep.status.code(), Some(1));
    assert_eq!(json(&sep)["check"], "separates");
}

#[test]
fn min_tree_reports_caveat() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    bblab(d, &["gen", "cross", "--n", "1", "--out", "p.json"]);
    let out = json(&bblab(
        d,
        &["min-tree", "--polytope", "p.json", "--m", "1", "--max-leaves", "4"],
    ));
    assert_eq!(out["result"], "exact");
    assert_eq!(out["leaves"], 2);
    assert!(out["caveat"].as_str().unwrap().contains("|pi_i| <= M"));
}

#[test]
fn experiment_is_deterministic_and_trees_replay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::create_dir(d.join("trees")).unwrap();
    let config = r#"{
        "families": [
            {"family": "cross", "n": [2, 3]},
            {"family": "packing", "n": [4, 5], "k": [2]},
            {"family": "perturbed-cross", "n": [3]}
        ],
        "strategies": [{"kind": "most-fractional"}, {"kind": "random-general", "m": 1, "seed": 0}],
        "seeds": [1, 2],
        "trees_dir": "trees"
    }"#;
    std::fs::write(d.join("exp.json"), config).unwrap();
    let a = bblab(d, &["experiment", "--config", "exp.json"]);
    let b = bblab(d, &["experiment", "--config", "exp.json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let csv = String::from_utf8(a.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("family,n,k,strategy,seed,nodes,leaves,status"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let k = if f[2].is_empty() {
            String::new()
        } else {
            format!("-k{}", f[2])
        };
        let tree = format!("trees/{}-n{}{}-{}-s{}.json", f[0], f[1], k, f[3], f[4]);
        let mut args = vec!["gen", f[0], "--n", f[1], "--seed", f[4], "--out", "inst.json"];
        if !f[2].is_empty() {
            args.extend(["--k", f[2], "--cover"]);
        }
        assert_eq!(bblab(d, &args).status.code(), Some(0));
        assert_eq!(f[7], "ProvedInfeasible", "{line}");
        let check = bblab(d, &["check-tree", "--polytope", "inst.json", "--tree", &tree]);
        assert_eq!(check.status.code(), Some(0), "{line}");
        assert_eq!(json(&check)["nodes"].to_string(), f[5]);
        rows += 1;
    }
    assert_eq!(rows, 2 * 2 * (2 + 2 + 1));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(bblab(d, &["gen", "tsp", "--n", "5", "--oracle"]).status.code(), Some(2));
    assert_eq!(
        bblab(d, &["gen", "cross", "--n", "2", "--format", "csv"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bblab(d, &["check-tree", "--polytope", "missing.json", "--tree", "t.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bblab(d, &["nonsense"]).status.code(), Some(2));
    std::fs::write(
        d.join("bad.json"),
        r#"{"families":[{"family":"perturbed-cross","n":[4]}],"strategies":[{"kind":"most-fractional"}]}"#,
    )
    .unwrap();
    let out = bblab(d, &["experiment", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing seed list"));
}

#[test]
fn verify_paper_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = bblab(d, &["verify-paper", "--only", "5,6"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("2/2 criteria passed"));
    let faulty = bblab(d, &["verify-paper", "--only", "1,2", "--fault", "drop-cross-row"]);
    assert_eq!(faulty.status.code(), Some(1));
    let text = String::from_utf8_lossy(&faulty.stdout);
    assert!(text.contains("FAIL  1") && text.contains("FAIL  2"), "{text}");
}
