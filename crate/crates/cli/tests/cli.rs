//! End-to-end runs of the binary: solving, generation round trips,
//! determinism, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contractlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_tmp(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

const TWO_AGENT_INSTANCE: &str = r#"{
    "model": "multi-agent",
    "costs": ["3/50", "1/10"],
    "f": {"kind": "additive", "weights": ["3/10", "1/2"]}
}"#;

const TWO_ACTION_INSTANCE: &str = r#"{
    "model": "multi-action",
    "costs": ["1/10", "1/10"],
    "f": {"kind": "additive", "weights": ["2/5", "2/5"]},
    "mode": "rational"
}"#;

const TRIANGLE: &str = r#"{"vertices": 3, "edges": [[0, 1], [0, 2], [1, 2]]}"#;

#[test]
fn solve_multi_agent_example() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_tmp(dir.path(), "e1.json", TWO_AGENT_INSTANCE);
    let out = run(&["solve", "--instance", &inst, "--model", "multi-agent"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["S"], serde_json::json!([1, 2]));
    assert_eq!(doc["objective"], serde_json::json!("12/25"));
}

#[test]
fn solve_multi_action_example() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_tmp(dir.path(), "e2.json", TWO_ACTION_INSTANCE);
    let out = run(&["solve", "--instance", &inst]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["alpha"], serde_json::json!("1/4"));
    assert_eq!(doc["principal_utility"], serde_json::json!("3/5"));
    assert_eq!(doc["best_response"], serde_json::json!([1, 2]));
}

#[test]
fn malformed_instance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_tmp(dir.path(), "bad.json", "{this is not json");
    let out = run(&["solve", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_tmp(dir.path(), "e1.json", TWO_AGENT_INSTANCE);
    let out = run(&["solve", "--instance", &inst, "--model", "multi-action"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_instance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let weights: Vec<String> = (0..26).map(|_| "\"1/26\"".to_string()).collect();
    let costs: Vec<String> = (0..26).map(|_| "\"1/100\"".to_string()).collect();
    let inst = write_tmp(
        dir.path(),
        "big.json",
        &format!(
            r#"{{"model":"multi-agent","costs":[{}],"f":{{"kind":"additive","weights":[{}]}}}}"#,
            costs.join(","),
            weights.join(",")
        ),
    );
    let out = run(&["solve", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(3));
    // an explicit lower cap also refuses smaller instances
    let small = write_tmp(dir.path(), "e1.json", TWO_AGENT_INSTANCE);
    let out = run(&["solve", "--instance", &small, "--cap-n", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn generate_hidden_set_has_uniform_costs() {
    let out = run(&["generate", "hidden-set", "--n", "27", "--seed", "7"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["costs"][0], serde_json::json!("1/162"));
    assert_eq!(doc["costs"].as_array().unwrap().len(), 27);

    // an explicit good set passes through verbatim
    let out = run(&["generate", "hidden-set", "--n", "8", "--good", "1,2"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["f"]["good"], serde_json::json!([1, 2]));
}

#[test]
fn generate_clique_xos_constants() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_tmp(dir.path(), "tri.json", TRIANGLE);
    let out = run(&[
        "generate",
        "clique-xos",
        "--graph",
        &graph,
        "--delta",
        "1",
        "--beta",
        "1/2",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    // all costs equal M = |V'| + eps = 7
    assert_eq!(doc["costs"][0], serde_json::json!("7"));
    assert_eq!(doc["costs"].as_array().unwrap().len(), 4);

    // round trip: solving the generated instance lands on M/(M+1+eps) = 7/11
    let inst = write_tmp(dir.path(), "gadget.json", &stdout_of(&out));
    let sol = run(&["solve", "--instance", &inst]);
    assert!(sol.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&sol)).unwrap();
    assert_eq!(doc["alpha"], serde_json::json!("7/11"));
    assert_eq!(doc["principal_utility"], serde_json::json!("4"));
}

#[test]
fn generate_kprover_counts() {
    let dir = tempfile::tempdir().unwrap();
    let tiny = run(&["generate", "tiny-formula"]);
    assert!(tiny.status.success());
    let formula = write_tmp(dir.path(), "f.json", &stdout_of(&tiny));
    let out = run(&[
        "generate",
        "kprover",
        "--formula",
        &formula,
        "--k",
        "2",
        "--ell",
        "2",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["k_prime"], serde_json::json!(30));
    assert_eq!(doc["universe"], serde_json::json!(3600));
    assert_eq!(doc["questions"], serde_json::json!(15));
}

#[test]
fn generate_solve_round_trip_on_gadgets() {
    let dir = tempfile::tempdir().unwrap();
    let agent = run(&["generate", "agent-gadget", "--k", "2", "--copies", "1"]);
    assert!(agent.status.success());
    let path = write_tmp(dir.path(), "agent.json", &stdout_of(&agent));
    let sol = run(&["solve", "--instance", &path]);
    assert!(sol.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&sol)).unwrap();
    assert_eq!(doc["objective"], serde_json::json!("1/2"));

    let action = run(&[
        "generate",
        "action-gadget",
        "--k",
        "2",
        "--copies",
        "1",
        "--beta",
        "1/20",
    ]);
    assert!(action.status.success());
    let path = write_tmp(dir.path(), "action.json", &stdout_of(&action));
    let sol = run(&["solve", "--instance", &path]);
    assert!(sol.status.success());

    // hidden-set at the smallest cube solves within the enumeration cap
    let hidden = run(&["generate", "hidden-set", "--n", "8", "--seed", "9"]);
    assert!(hidden.status.success());
    let path = write_tmp(dir.path(), "hidden.json", &stdout_of(&hidden));
    let sol = run(&["solve", "--instance", &path]);
    assert!(sol.status.success());
}

#[test]
fn generated_descriptors_reparse() {
    // documents that carry an embedded set-function descriptor stay parseable
    let planted = run(&["generate", "planted-cover", "--k", "3", "--copies", "2"]);
    assert!(planted.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&planted)).unwrap();
    let f = contractlab_core::io::set_function_from_json(&doc["f"].to_string()).unwrap();
    assert_eq!(f.ground_size(), 9);
    assert_eq!(doc["planted"], serde_json::json!([1, 2, 3]));

    let dir = tempfile::tempdir().unwrap();
    let tiny = run(&["generate", "tiny-formula"]);
    let formula = write_tmp(dir.path(), "f.json", &stdout_of(&tiny));
    let prover = run(&[
        "generate", "kprover", "--formula", &formula, "--k", "2", "--ell", "2",
    ]);
    assert!(prover.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&prover)).unwrap();
    let f = contractlab_core::io::set_function_from_json(&doc["f"].to_string()).unwrap();
    assert_eq!(f.ground_size(), 420);
}

#[test]
fn clique_commands_emit_reports() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_tmp(dir.path(), "tri.json", TRIANGLE);
    let out = run(&[
        "clique",
        "distinguish",
        "--graph",
        &graph,
        "--delta",
        "4",
        "--beta",
        "1/2",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["verdict"], serde_json::json!("SMALL"));

    let out = run(&["clique", "approx", "--graph", &graph, "--beta", "1/2"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let est = doc["omega_estimate"].as_u64().unwrap();
    assert!((1..=3).contains(&est));
    assert!(!doc["rounds"].as_array().unwrap().is_empty());
}

#[test]
fn estimate_success_reports_bound() {
    let out = run(&[
        "estimate-success",
        "--n",
        "512",
        "--trials",
        "2000",
        "--seed",
        "11",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["set_size"], serde_json::json!(22));
    assert_eq!(doc["bound_applicable"], serde_json::json!(true));
    assert!(doc["rate"].as_f64().unwrap() <= doc["bound"].as_f64().unwrap());
}

#[test]
fn estimate_below_512_warns_but_succeeds() {
    let out = run(&[
        "estimate-success",
        "--n",
        "64",
        "--trials",
        "500",
        "--seed",
        "11",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["bound_applicable"], serde_json::json!(false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n >= 512"));

    // non-cube ground sizes are an input error
    let out = run(&["estimate-success", "--n", "100", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subcommand_runs_a_suite() {
    let out = run(&["verify", "analytic-inequalities"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("suite,check,status,detail\n"));
    assert!(text.contains("analytic-inequalities"));
    assert!(text.contains(",pass,"));

    let out = run(&["verify", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let a = run(&["generate", "hidden-set", "--n", "27", "--seed", "3"]);
    let b = run(&["generate", "hidden-set", "--n", "27", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["generate", "hidden-set", "--n", "27", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);

    let e1 = run(&[
        "estimate-success",
        "--n",
        "512",
        "--trials",
        "1000",
        "--seed",
        "5",
    ]);
    let e2 = run(&[
        "estimate-success",
        "--n",
        "512",
        "--trials",
        "1000",
        "--seed",
        "5",
    ]);
    assert_eq!(e1.stdout, e2.stdout);
}

#[test]
fn worker_count_does_not_change_results() {
    // trial chunks own their rng streams, so the estimate is byte-identical
    // whether one worker or many run them
    let single = bin()
        .env("CONTRACTLAB_THREADS", "1")
        .args(["estimate-success", "--n", "512", "--trials", "4000", "--seed", "6"])
        .output()
        .unwrap();
    let multi = bin()
        .env("CONTRACTLAB_THREADS", "4")
        .args(["estimate-success", "--n", "512", "--trials", "4000", "--seed", "6"])
        .output()
        .unwrap();
    assert!(single.status.success());
    assert_eq!(single.stdout, multi.stdout);
}
