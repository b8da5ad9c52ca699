use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rsgame::report::{Payload, RunReport};

fn rsgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn smartgrid(dir: &Path, extra: &[&str]) -> PathBuf {
    let path = dir.join("grid.json");
    let mut args = vec!["example", "smartgrid", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = rsgame(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

fn machine(args: &[&str]) -> (RunReport, String, i32) {
    let mut full = vec!["--machine"];
    full.extend_from_slice(args);
    let o = rsgame(&full);
    let text = stdout(&o);
    let report: RunReport = serde_json::from_str(&text).expect("machine output parses");
    (report, text, o.status.code().unwrap())
}

const ABSORBING: &str = r#"{"n_states": 2, "theta": 1.0, "states": [
  {"actions_a": ["a"], "actions_b": ["b"], "cost": [[0.0]], "transition": [[[1.0, 0.0]]]},
  {"actions_a": ["a"], "actions_b": ["b"], "cost": [[1.0]], "transition": [[[0.5, 0.5]]]}]}"#;

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let grid = smartgrid(dir.path(), &[]);
    assert_eq!(
        rsgame(&["validate", grid.to_str().unwrap()]).status.code(),
        Some(0)
    );

    let broken = dir.path().join("broken.json");
    let text = ABSORBING.replace("[[[0.5, 0.5]]]", "[[[0.5, 0.6]]]");
    std::fs::write(&broken, text).unwrap();
    let o = rsgame(&["validate", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("(1,0,0)"), "{}", stdout(&o));

    let o = rsgame(&[
        "validate",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ nope").unwrap();
    assert_eq!(
        rsgame(&["validate", garbage.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn irreducibility_report() {
    let dir = tempfile::tempdir().unwrap();
    let grid = smartgrid(dir.path(), &[]);
    let o = rsgame(&["irreducibility", grid.to_str().unwrap()]);
    let out = stdout(&o);
    assert!(out.contains("i*        2"), "{out}");
    assert!(out.contains("irreducible"));

    let absorbing = dir.path().join("absorbing.json");
    std::fs::write(&absorbing, ABSORBING).unwrap();
    let (report, _, code) = machine(&["irreducibility", absorbing.to_str().unwrap()]);
    assert_eq!(code, 0);
    match report.outputs {
        Payload::Irreducibility(r) => assert!(!r.irreducible),
        other => panic!("unexpected payload {other:?}"),
    }
}

#[test]
fn value_machine_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let grid = smartgrid(dir.path(), &[]);
    let (report, text, code) = machine(&["value", grid.to_str().unwrap(), "--eps", "8.333e-4"]);
    assert_eq!(code, 0);
    assert_eq!(report.to_json_string(), text.trim_end());
    match &report.outputs {
        Payload::Value(r) => assert!((r.rho_tilde - 1.3217).abs() < 2e-3),
        other => panic!("unexpected payload {other:?}"),
    }

    let o = rsgame(&[
        "--max-outer",
        "2",
        "value",
        grid.to_str().unwrap(),
        "--eps",
        "1e-9",
    ]);
    assert_eq!(o.status.code(), Some(4));

    let absorbing = dir.path().join("absorbing.json");
    std::fs::write(&absorbing, ABSORBING).unwrap();
    assert_eq!(
        rsgame(&["value", absorbing.to_str().unwrap(), "--eps", "0.1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn saddle_then_verify_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let grid = smartgrid(dir.path(), &[]);
    let pol = dir.path().join("pol.json");
    let o = rsgame(&[
        "saddle",
        grid.to_str().unwrap(),
        "--eps",
        "0.05",
        "--policies-out",
        pol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("0.2599") && out.contains("0.7584") && out.contains("0.7499"),
        "{out}"
    );
    assert!(out.contains("PASS"));

    let (report, _, code) = machine(&[
        "verify",
        grid.to_str().unwrap(),
        "--policies",
        pol.to_str().unwrap(),
        "--eps",
        "0.05",
    ]);
    assert_eq!(code, 0);
    match report.outputs {
        Payload::Verification(c) => assert!(c.passes),
        other => panic!("unexpected payload {other:?}"),
    }

    let sim = |seed: &str| {
        rsgame(&[
            "--machine",
            "simulate",
            grid.to_str().unwrap(),
            "--policies",
            pol.to_str().unwrap(),
            "--seed",
            seed,
            "--horizon",
            "200",
            "--trials",
            "400",
        ])
    };
    let (a, b) = (sim("5"), sim("5"));
    assert_eq!(a.status.code(), Some(0));
    let ra: RunReport = serde_json::from_slice(&a.stdout).unwrap();
    let rb: RunReport = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(ra.outputs, rb.outputs);
    match ra.outputs {
        // long-horizon estimate should sit near the game value
        Payload::Simulation(e) => assert!(
            (e.estimate - 1.3217).abs() < 0.05 + 5.0 * e.std_error,
            "{e:?}"
        ),
        other => panic!("unexpected payload {other:?}"),
    }
}

#[test]
fn verify_rejects_a_bad_pair() {
    let dir = tempfile::tempdir().unwrap();
    let grid = smartgrid(dir.path(), &[]);
    let pol = dir.path().join("bad.json");
    // storage discharged to zero every time: the grid exploits it
    std::fs::write(
        &pol,
        r#"{"phi": [{"0": 1.0}, {"0": 1.0}, {"0": 1.0}],
            "psi": [{"(0,0)": 1.0}, {"(0,0)": 1.0}, {"(0,0)": 1.0}]}"#,
    )
    .unwrap();
    let o = rsgame(&[
        "verify",
        grid.to_str().unwrap(),
        "--policies",
        pol.to_str().unwrap(),
        "--eps",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL"));

    std::fs::write(&pol, r#"{"phi": [{"9": 1.0}], "psi": []}"#).unwrap();
    let o = rsgame(&[
        "verify",
        grid.to_str().unwrap(),
        "--policies",
        pol.to_str().unwrap(),
        "--eps",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn example_variants() {
    let dir = tempfile::tempdir().unwrap();
    let one = smartgrid(dir.path(), &["--ns", "0"]);
    let model = rsgame::GameModel::load(&one).unwrap();
    assert_eq!(model.n_states(), 1);

    let o = rsgame(&[
        "example",
        "smartgrid",
        "--theta",
        "0.5",
        "--out",
        dir.path().join("hot.json").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
    let hot = dir.path().join("hot.json");
    let o = rsgame(&["saddle", hot.to_str().unwrap(), "--eps", "0.05"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("admissible range"), "{}", stderr(&o));
}

#[test]
fn constant_cost_saddle_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.json");
    std::fs::write(
        &path,
        r#"{"n_states": 2, "theta": 1.0, "states": [
  {"actions_a": ["x", "y"], "actions_b": ["u"], "cost": [[2.0], [2.0]], "transition": [[[0.5, 0.5]], [[0.1, 0.9]]]},
  {"actions_a": ["x"], "actions_b": ["u"], "cost": [[2.0]], "transition": [[[0.5, 0.5]]]}]}"#,
    )
    .unwrap();
    let (report, _, code) = machine(&["saddle", path.to_str().unwrap(), "--eps", "0.1"]);
    assert_eq!(code, 0);
    match report.outputs {
        Payload::Saddle { result, .. } => {
            assert!(result.constant_cost);
            assert_eq!(result.rho_eps, 2.0);
        }
        other => panic!("unexpected payload {other:?}"),
    }
}
