use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_string_lossy().into_owned()
}

fn truthlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_truthlab"))
        .args(args)
        .env_remove("TRUTHLAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn unknown_bound_exits_with_error() {
    let out = truthlab(&["reproduce", "--bound", "thm99"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "ERROR");
}

#[test]
fn worst_case_bound_reports_exact_values_and_echoes_parameters() {
    let out = truthlab(&["reproduce", "--bound", "thm2", "--epsilon", "1/100"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["status"], "CONFIRMED");
    assert_eq!(report["computed_value"], "200/101");
    assert_eq!(report["paper_bound"], "200/101");
    assert_eq!(report["params"]["epsilon"], "1/100");
    assert_eq!(report["params"]["seed"], "0");
}

#[test]
fn csv_output_has_fixed_header() {
    let out = truthlab(&["reproduce", "--bound", "thm4", "--m", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("bound_id,m,epsilon,computed_value,paper_bound,status,wall_ms")
    );
    assert_eq!(lines.next(), Some("thm4,2,1/100,30001/20200,29799/20200,CONFIRMED,"));
}

#[test]
fn budget_from_environment_is_enforced() {
    let out = Command::new(env!("CARGO_BIN_EXE_truthlab"))
        .args(["reproduce", "--bound", "thm6"])
        .env("TRUTHLAB_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert!(report["error"].as_str().unwrap().contains("budget"));
}

#[test]
fn second_price_is_monotone_on_the_two_machine_domain() {
    let domain = data("two-machine-domain.json");
    let out = truthlab(&[
        "check",
        "--mechanism",
        "minwork-vcg",
        "--property",
        "wmon",
        "--domain",
        &domain,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["certificate"]["violations"], serde_json::json!([]));
}

#[test]
fn optimal_makespan_violates_wmon_with_witness() {
    let domain = data("two-machine-domain.json");
    let out = truthlab(&[
        "check",
        "--mechanism",
        "opt-lex",
        "--property",
        "wmon",
        "--domain",
        &domain,
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["status"], "VIOLATED");
    let witness = &report["certificate"]["violations"][0];
    assert!(witness["player"].is_u64());
    assert_ne!(witness["profile"], witness["deviation"]);
}

#[test]
fn malformed_domain_is_an_error() {
    let dir = std::env::temp_dir().join(format!("truthlab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"type\":\"scheduling-domain\",\"machines\":[[{\"name\":\"v\"").unwrap();
    let out = truthlab(&[
        "check",
        "--mechanism",
        "minwork-vcg",
        "--property",
        "wmon",
        "--domain",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "ERROR");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn randomized_partition_with_fixed_coin() {
    let out = truthlab(&[
        "run",
        "--mechanism",
        "nr-randomized",
        "--instance",
        &data("one-task.json"),
        "--coins",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cert = &json(&out)["certificate"];
    assert_eq!(cert["allocation"]["assignment"], serde_json::json!([0]));
    assert_eq!(cert["payments"][0], "8/3");
}

#[test]
fn randomized_partition_needs_coins() {
    let out = truthlab(&[
        "run",
        "--mechanism",
        "nr-randomized",
        "--instance",
        &data("one-task.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn second_price_pays_runner_up_cost() {
    let out = truthlab(&[
        "run",
        "--mechanism",
        "minwork-vcg",
        "--instance",
        &data("one-task-vcg.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["certificate"]["payments"], serde_json::json!([5, 0]));
}

#[test]
fn cost_minimizing_tree_routes_through_the_hub() {
    let out = truthlab(&[
        "run",
        "--mechanism",
        "costmin-tree",
        "--instance",
        &data("three-source-star.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(
        report["certificate"]["nexthop"],
        serde_json::json!({"x": "d", "y": "x", "z": "x"})
    );
    assert_eq!(report["computed_value"], "3");
}

#[test]
fn mechanism_must_match_instance_type() {
    let out = truthlab(&[
        "run",
        "--mechanism",
        "costmin-tree",
        "--instance",
        &data("one-task.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].as_str().unwrap().contains("does not apply"));
}

#[test]
fn all_bounds_are_confirmed() {
    let out = truthlab(&["reproduce", "--bound", "all", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.lines().skip(1).all(|l| l.contains(",CONFIRMED,")));
}
