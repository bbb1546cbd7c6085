use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqs")).args(args).output().expect("spawn hqs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stdout));
    })
}

fn crate_file(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel).to_str().unwrap().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn outlived_running_example_exits_zero() {
    let o = hqs(&["check", "--system", "fixture:fig1", "--outlived", "2,3,5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["holds"], true);
    assert_eq!(v["reports"][0]["property"], "Outlived");
}

#[test]
fn broken_consistency_exits_one_with_witness() {
    let o = hqs(&["check", "--system", "fixture:s5-attack-post", "--consistency"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["holds"], false);
    let w = &v["reports"][0]["witness"];
    assert_eq!(w["kind"], "quorum_pair");
    // the two quorums in the witness share no well-behaved process
    let q: Vec<u64> = w["q"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    let q2: Vec<u64> = w["q2"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(q.iter().all(|p| !q2.contains(p) || *p == 1), "{q:?} {q2:?}");
}

#[test]
fn default_checks_on_file_path() {
    let o = hqs(&["check", "--system", &crate_file("fixtures/fig1.json"), "--format", "text"]);
    // Byzantine 4 sits in a quorum of 1 but declares nothing
    assert_eq!(code(&o), 1);
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].ends_with("holds") && lines[1].ends_with("holds"), "{out}");
    assert!(lines[2].starts_with("sharing: FAILS") && lines[2].contains("member 4"), "{out}");
}

#[test]
fn empty_system_holds_vacuously() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "empty.json", r#"{"universe": [], "byzantine": [], "quorums": {}}"#);
    let o = hqs(&["check", "--system", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["holds"], true);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&hqs(&["check", "--system", missing.to_str().unwrap()])), 2);
    let bad = write(dir.path(), "bad.json", "{\"universe\": [1,");
    let o = hqs(&["check", "--system", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(code(&hqs(&["check", "--system", "fixture:nope"])), 2);
    assert_eq!(code(&hqs(&["frobnicate"])), 2);
    assert_eq!(code(&hqs(&["check", "--system", "fixture:fig1", "--attack", "9"])), 2);
}

#[test]
fn graph_of_second_example() {
    let o = hqs(&["graph", "--system", "fixture:fig2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["sinks"], serde_json::json!([[1, 2, 3, 5]]));
    assert_eq!(v["well_behaved_sink"], serde_json::json!([1, 2, 3]));
    let dot = hqs(&["graph", "--system", "fixture:fig2"]);
    let dot = String::from_utf8(dot.stdout).unwrap();
    assert!(dot.contains("digraph quorums {") && dot.contains("// sink 0: {1,2,3,5}"), "{dot}");
}

#[test]
fn singleton_and_two_cliques() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.json", r#"{"universe": [1], "quorums": {"1": [[1]]}}"#);
    let dot = String::from_utf8(hqs(&["graph", "--system", one.to_str().unwrap()]).stdout).unwrap();
    assert!(dot.contains("\"1\" -> \"1\";"), "{dot}");

    let two = write(
        dir.path(),
        "two.json",
        r#"{"universe": [1,2,3,4], "quorums": {"1": [[1,2]], "2": [[1,2]], "3": [[3,4]], "4": [[3,4]]}}"#,
    );
    let o = hqs(&["graph", "--system", two.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json(&o)["sinks"].as_array().unwrap().len(), 2);
    let c = hqs(&["check", "--system", two.to_str().unwrap(), "--consistency"]);
    assert_eq!(code(&c), 1);
}

#[test]
fn enumerate_second_example() {
    let o = hqs(&["enumerate", "--system", "fixture:fig2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["minimal_quorums"], serde_json::json!([[1, 2], [1, 3, 5]]));
    // 1 sits in every quorum of 2
    assert!(v["blocking"]["2"].as_array().unwrap().contains(&serde_json::json!([1])));
    let z = json(&hqs(&["enumerate", "--system", "fixture:fig2", "--k", "0"]));
    assert!(z["blocking"].as_object().unwrap().values().all(|b| b.as_array().unwrap().is_empty()));
}

#[test]
fn enumerate_refuses_above_bound() {
    let o = hqs(&["enumerate", "--system", "fixture:fig2", "--bound", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = hqs(&["fixtures", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let mut n = 0;
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let path = e.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = hqs_core::parse_system(&text).unwrap();
        assert_eq!(hqs_core::write_system(&doc), text, "{}", path.display());
        let shipped = crate_file(&format!("fixtures/{}", path.file_name().unwrap().to_str().unwrap()));
        assert_eq!(std::fs::read_to_string(shipped).unwrap(), text);
        n += 1;
    }
    assert_eq!(n, hqs_core::fixtures::library().len());
}

#[test]
fn simulate_scenarios_exit_codes() {
    for (name, want) in [
        ("leave_pair", 0),
        ("add_attack_concurrent", 0),
        ("discovery_fig2_deceive", 0),
        ("brb_honest_fig1", 0),
        ("ac_leave_fig4_q1", 1),
        ("pc_leave_fig4_q1", 1),
    ] {
        let o = hqs(&["simulate", &crate_file(&format!("scenarios/{name}.json"))]);
        assert_eq!(code(&o), want, "{name}: {}", String::from_utf8_lossy(&o.stdout));
        let v = json(&o);
        assert_eq!(v["verdict"], if want == 0 { "PASS" } else { "FAIL" }, "{name}");
    }
}

#[test]
fn simulate_writes_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let sc = crate_file("scenarios/leave_pair.json");
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for t in [&a, &b] {
        let o = hqs(&["simulate", &sc, "--seed", "7", "--trace", t.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    assert!(!ta.is_empty());
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    for line in ta.lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
}

#[test]
fn simulate_many_seeds() {
    let sc = crate_file("scenarios/leave_pair.json");
    let v = json(&hqs(&["simulate", &sc, "--seeds", "5"]));
    assert_eq!(v["verdict"], "PASS");
    let seeds: Vec<u64> = v["runs"].as_array().unwrap().iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [0, 1, 2, 3, 4]);
    let text = hqs(&["simulate", &sc, "--seeds", "2", "--format", "text"]);
    let out = String::from_utf8(text.stdout).unwrap();
    assert!(out.starts_with("seed 0: PASS"), "{out}");
}

#[test]
fn simulate_bad_scenario_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "sc.json", r#"{"protocol": "nonsense", "system": "fixture:fig1", "seed": 0}"#);
    assert_eq!(code(&hqs(&["simulate", p.to_str().unwrap()])), 2);
}
