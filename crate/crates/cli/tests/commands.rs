use std::path::PathBuf;

use hmarkov::format::parse_tensor;
use hmarkov::Caps;
use hmarkov_cli::{run_from_args, RunOutput, EXIT_INPUT, EXIT_LIMIT, EXIT_OK};
use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    p.to_str().unwrap().to_owned()
}

fn hm(args: &[&str]) -> RunOutput {
    run_from_args(std::iter::once("hmarkov").chain(args.iter().copied()))
}

fn json_of(out: &RunOutput) -> Value {
    assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn limit_on_regular_example_is_rank_one() {
    let v = json_of(&hm(&["limit", &data("regular_four_state.json")]));
    assert_eq!(v["kind"], "RankOne");
    let want = [2.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
    for key in ["pi", "pi_limit", "pi_eig"] {
        for (a, b) in floats(&v[key]).iter().zip(want) {
            assert!((a - b).abs() < 1e-8, "{key}");
        }
    }
}

#[test]
fn limit_on_periodic_example_cycles() {
    let v = json_of(&hm(&["limit", &data("periodic_three_state.json")]));
    assert_eq!(v["kind"], "Cycle");
    assert_eq!(v["period"], 2);
    assert_eq!(v["representatives"].as_array().unwrap().len(), 2);
}

#[test]
fn limit_on_absorbing_example_is_general() {
    let v = json_of(&hm(&["limit", &data("absorbing_two_state.json")]));
    assert_eq!(v["kind"], "General");
    assert!(v.get("pi_eig").is_none());
}

#[test]
fn validate_names_the_broken_fiber() {
    let out = hm(&["validate", &data("broken_fiber.json")]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("(2,1)"), "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(
        v["report"]["fiber_violations"][0]["context"],
        serde_json::json!([2, 1])
    );

    let ok = json_of(&hm(&["validate", &data("regular_four_state.json")]));
    assert_eq!(ok["valid"], true);
}

#[test]
fn analysis_commands_reject_invalid_tensors() {
    for cmd in ["reduce", "classify", "limit"] {
        let out = hm(&[cmd, &data("broken_fiber.json")]);
        assert_eq!(out.code, EXIT_INPUT, "{cmd}");
        assert!(out.stdout.is_empty());
        assert!(out.stderr.contains("(2,1)"));
    }
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(
        hm(&["classify", missing.to_str().unwrap()]).code,
        EXIT_INPUT
    );

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"order\": 3}").unwrap();
    assert_eq!(
        hm(&["classify", garbage.to_str().unwrap()]).code,
        EXIT_INPUT
    );

    let regular = data("regular_four_state.json");
    assert_eq!(hm(&["limit", &regular, "--tol", "0"]).code, EXIT_INPUT);
    assert_eq!(hm(&["limit", &regular, "--tol", "-1"]).code, EXIT_INPUT);
    assert_eq!(hm(&["evolve", &regular, "--steps", "0"]).code, EXIT_INPUT);
    assert_eq!(
        hm(&["evolve", &regular, "--steps", "2", "--initial", "1,5"]).code,
        EXIT_INPUT
    );
    assert_eq!(
        hm(&["simulate", &regular, "--steps", "2", "--initial", "1"]).code,
        EXIT_INPUT
    );
    assert_eq!(
        hm(&["simulate", &regular, "--steps", "2", "--burn-in", "4"]).code,
        EXIT_INPUT
    );
    assert_eq!(hm(&["power", &regular]).code, EXIT_INPUT);
    assert_eq!(hm(&["frobnicate"]).code, EXIT_INPUT);
}

#[test]
fn resource_limits_exit_two() {
    let regular = data("regular_four_state.json");
    let out = hm(&["classify", &regular, "--pattern-budget", "3"]);
    assert_eq!(out.code, EXIT_LIMIT);
    assert!(out.stderr.contains("budget"));
    let out = hm(&["reduce", &regular, "--max-side", "8"]);
    assert_eq!(out.code, EXIT_LIMIT);
    assert!(out.stderr.contains("cap is 8"), "{}", out.stderr);
    assert_eq!(
        hm(&["classify", &regular, "--max-entries", "10"]).code,
        EXIT_LIMIT
    );
    assert_eq!(
        hm(&["classify", &regular, "--max-subset-states", "2"]).code,
        EXIT_LIMIT
    );
    let out = hm(&[
        "limit",
        &data("absorbing_two_state.json"),
        "--max-iter",
        "1",
    ]);
    assert_eq!(json_of(&out)["kind"], "Exhausted");
}

#[test]
fn classify_reports_witnesses() {
    let v = json_of(&hm(&["classify", &data("regular_four_state.json")]));
    assert_eq!(v["regular"]["witness_k"], 10);
    assert_eq!(v["q_regular"]["regular"], false);
    let v = json_of(&hm(&["classify", &data("absorbing_two_state.json")]));
    assert_eq!(v["irreducible"]["counterexample"], serde_json::json!([2]));
}

#[test]
fn reduce_emits_the_matrix() {
    let v = json_of(&hm(&["reduce", &data("absorbing_two_state.json")]));
    assert_eq!(v["N"], 4);
    assert_eq!(v["values"].as_array().unwrap().len(), 16);
}

#[test]
fn power_one_round_trips() {
    for name in [
        "regular_four_state.json",
        "periodic_three_state.json",
        "absorbing_two_state.json",
    ] {
        let out = hm(&["power", &data(name), "--k", "1"]);
        assert_eq!(out.code, EXIT_OK);
        let back = parse_tensor(&out.stdout, &Caps::default()).unwrap();
        let original = parse_tensor(
            &std::fs::read_to_string(data(name)).unwrap(),
            &Caps::default(),
        )
        .unwrap();
        assert_eq!(back, original, "{name}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let regular = data("regular_four_state.json");
    let runs: [&[&str]; 5] = [
        &["limit", &regular],
        &["classify", &regular],
        &["power", &regular, "--k", "7"],
        &["evolve", &regular, "--steps", "6"],
        &[
            "simulate",
            &regular,
            "--steps",
            "500",
            "--seed",
            "9",
            "--burn-in",
            "50",
        ],
    ];
    for args in runs {
        let a = hm(args);
        let b = hm(args);
        assert_eq!(a.code, EXIT_OK);
        assert_eq!(a, b, "{args:?}");
    }
    let other = hm(&["simulate", &regular, "--steps", "500", "--seed", "10"]);
    assert_ne!(
        other,
        hm(&["simulate", &regular, "--steps", "500", "--seed", "9"])
    );
}

#[test]
fn evolve_walkthrough_from_literal_and_file() {
    let periodic = data("periodic_three_state.json");
    let v = json_of(&hm(&[
        "evolve",
        &periodic,
        "--steps",
        "3",
        "--initial",
        "1,1",
    ]));
    let xs: Vec<Vec<f64>> = v["marginals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| floats(&r["x"]))
        .collect();
    assert_eq!(
        xs,
        vec![
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0]
        ]
    );
    assert_eq!(v["marginals"][0]["t"], 3);

    let dir = tempfile::tempdir().unwrap();
    let joint = dir.path().join("start.json");
    let mut probs = vec![0.0; 9];
    probs[0] = 1.0;
    std::fs::write(
        &joint,
        serde_json::json!({"order": 3, "dim": 3, "probs": probs}).to_string(),
    )
    .unwrap();
    let w = json_of(&hm(&[
        "evolve",
        &periodic,
        "--steps",
        "3",
        "--initial",
        joint.to_str().unwrap(),
    ]));
    assert_eq!(v, w);
}

#[test]
fn history_literal_is_oldest_first() {
    let absorbing = data("absorbing_two_state.json");
    // X_1 = 1, X_2 = 2: the context (2,1) moves to 1 or 2 with equal odds
    let v = json_of(&hm(&[
        "evolve",
        &absorbing,
        "--steps",
        "1",
        "--initial",
        "(1,2)",
    ]));
    assert_eq!(floats(&v["marginals"][0]["x"]), vec![0.5, 0.5]);
    let v = json_of(&hm(&[
        "simulate",
        &absorbing,
        "--steps",
        "3",
        "--initial",
        "2,2",
    ]));
    assert_eq!(
        v["trajectory"]["states"],
        serde_json::json!([2, 2, 2, 2, 2])
    );
}

#[test]
fn output_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    let regular = data("regular_four_state.json");
    let out = hm(&["reduce", &regular, "--output", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        hm(&["reduce", &regular]).stdout
    );
}
