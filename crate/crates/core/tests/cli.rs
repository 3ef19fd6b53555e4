use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn evodyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evodyn")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const RPS: &str = r#"{
  "name": "rps",
  "game": { "type": "rps", "w": 2, "l": 1 },
  "dynamics": { "type": "standard" },
  "x0": [0.5, 0.25, 0.25],
  "integrator": { "horizon": 5 },
  "certifications": [ { "type": "ledger", "kind": "payoff" }, { "type": "classify" } ]
}"#;

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "rps.json", RPS);
    let out_dir = dir.path().join("out");
    let out = evodyn(&["simulate", &path, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectory.csv", "ledger.csv", "simplex.csv", "simplex.svg", "summary.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let simplex = fs::read_to_string(out_dir.join("simplex.csv")).unwrap();
    assert_eq!(simplex.lines().next(), Some("t,u,v"));
    assert_eq!(stdout_json(&out)["verdicts"][1]["outcome"], "strictly_passive");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let bad_dims = scenario(dir.path(), "bad.json", &RPS.replace("[0.5, 0.25, 0.25]", "[0.5, 0.5]"));
    assert_eq!(evodyn(&["simulate", &bad_dims, "--out", out_dir]).status.code(), Some(2));

    let malformed = scenario(dir.path(), "broken.json", "{ \"name\": ");
    let out = evodyn(&["simulate", &malformed, "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    // Leaves the simplex in finite time.
    let blowup = scenario(
        dir.path(),
        "blowup.json",
        &RPS.replace(
            r#""type": "rps", "w": 2, "l": 1"#,
            r#""type": "matrix", "a": [[0, 0, 0], [0, 0, 0], [0, 0, 1e300]]"#,
        )
        .replace("[0.5, 0.25, 0.25]", "[0.2, 0.2, 0.6]")
        .replace(r#", { "type": "classify" }"#, ""),
    );
    assert_eq!(evodyn(&["simulate", &blowup, "--out", out_dir]).status.code(), Some(3));

    let inapplicable = scenario(
        dir.path(),
        "freq.json",
        &RPS.replace(r#"{ "type": "classify" }"#, r#"{ "type": "freq", "kind": "sni" }"#),
    );
    let out = evodyn(&["simulate", &inapplicable, "--out", out_dir]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stdout_json(&out)["verdicts"][1]["status"], "not_applicable");
}

#[test]
fn certification_subcommands() {
    let out = evodyn(&["classify-game", "--w", "1", "--l", "2"]);
    assert_eq!(stdout_json(&out)["class"], "non_passive");
    let out = evodyn(&["classify-game", "--matrix", "[[0,1],[-1,0]]"]);
    assert_eq!(stdout_json(&out)["class"], "lossless");

    let out = evodyn(&["freq-check", "--alpha", "3", "--beta", "2"]);
    assert_eq!(stdout_json(&out)["class"], "passive_and_ni");

    let dir = tempfile::tempdir().unwrap();
    let sni = scenario(
        dir.path(),
        "sni.json",
        r#"{ "a": [[-0.9, 0], [0, -1.2]], "b": [[1, 0], [0, 1]], "c": [[1, 0], [0, 1]], "d": [[-3, 0], [0, -3]] }"#,
    );
    let out = evodyn(&["freq-check", "--system", &sni, "--kind", "sni"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["pass"], true);

    let di = r#""a": [[0, 1], [0, 0]], "b": [[0], [1]], "c": [[1, 0]], "d": [[0]]"#;
    let good = scenario(dir.path(), "lmi_good.json", &format!("{{ {di}, \"p\": [[0, 0], [0, 1]] }}"));
    let bad = scenario(dir.path(), "lmi_bad.json", &format!("{{ {di}, \"p\": [[1, 0], [0, 1]] }}"));
    assert_eq!(evodyn(&["lmi-check", &good]).status.code(), Some(0));
    assert_eq!(evodyn(&["lmi-check", &bad]).status.code(), Some(4));

    let out = evodyn(&["linearize", "--x-star", "0.25,0.25,0.25,0.25"]);
    let b_r = &stdout_json(&out)["b_r"];
    assert_eq!(b_r.as_array().unwrap().len(), 3);

    let plant = scenario(dir.path(), "plant.json", r#"{ "a": [[-1]], "b": [[1]], "c": [[1]], "d": [[0]] }"#);
    let ctrl = scenario(dir.path(), "ctrl.json", r#"{ "a": [[-2]], "b": [[1]], "c": [[0.5]], "d": [[0]] }"#);
    let out = evodyn(&["stability", "--plant", &plant, "--controller", &ctrl]);
    let v = stdout_json(&out);
    assert_eq!(v["hurwitz"], true);
    assert_eq!(v["dc_gain"]["pass"], true);
}

#[test]
fn batch_runs_each_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    for (name, w) in [("a", 2), ("b", 1), ("c", 3)] {
        scenario(&input, &format!("{name}.json"), &RPS.replace("\"w\": 2", &format!("\"w\": {w}")));
    }
    let out_dir = dir.path().join("out");
    let out = evodyn(&["batch", input.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--jobs", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    for name in ["a", "b", "c"] {
        assert!(out_dir.join(name).join("summary.json").exists());
        assert!(report[name]["final_state"].is_array());
    }
    assert_eq!(report["b"]["verdicts"][1]["outcome"], "lossless");
}
