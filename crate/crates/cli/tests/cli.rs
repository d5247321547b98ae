//! End-to-end tests of the `metra` binary: exit codes, output shapes, and
//! determinism across invocations.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn metra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("stdout is JSON")
}

fn sample(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../machines")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn validate_accepts_good_machines() {
    let out = metra(&["validate", &sample("hello.tm")]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("valid       true"));
}

#[test]
fn validate_rejects_duplicate_dispatch_keys() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "q0 _ a q1\nq0 _ b q2").unwrap();
    let out = metra(&["validate", file.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 1);
    let report = &json(&out)["report"];
    assert_eq!(report["valid"], serde_json::Value::Bool(false));
    let violations = report["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 1, "{violations:?}");
    assert!(violations[0].as_str().unwrap().contains("duplicate dispatch key"));
}

#[test]
fn validate_missing_file_is_a_usage_error() {
    let out = metra(&["validate", "no-such-file.tm"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn syntax_errors_are_usage_errors() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "q0 _ a nope").unwrap();
    let out = metra(&["validate", file.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn run_reports_status_result_steps() {
    let out = metra(&["run", &sample("hello.tm"), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let report = &json(&out)["report"];
    assert_eq!(report["status"], "halted");
    assert_eq!(report["result"], "hi");
    assert_eq!(report["steps"], 3);
}

#[test]
fn run_budget_exhaustion_is_still_a_report() {
    let out = metra(&[
        "run",
        &sample("right_mover.tm"),
        "--budget",
        "250",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let report = &json(&out)["report"];
    assert_eq!(report["status"], "budget_exhausted");
    assert_eq!(report["steps"], 250);
}

#[test]
fn seeded_world_runs_are_reproducible() {
    let args = [
        "run",
        &sample("dice_reporter.tm"),
        "--world",
        &sample("worlds/dice.json"),
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let first = metra(&args);
    let second = metra(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let report = &json(&first)["report"];
    assert_eq!(report["status"], "halted");
    let face = report["result"].as_str().unwrap();
    assert!(("1"..="6").contains(&face), "{face}");
}

#[test]
fn trace_lists_every_step() {
    let out = metra(&["run", &sample("hello.tm"), "--trace", "--format", "json"]);
    let report = &json(&out)["report"];
    let trace = report["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 3);
    assert_eq!(trace[0]["instruction"], "q0 _ h q1");
}

#[test]
fn quote_then_unquote_round_trips() {
    let quoted = stdout(&metra(&["quote", &sample("hello.tm")]));
    let quoted = quoted.trim();
    assert_eq!(quoted, "#95,104,105::0|0|95|104|1;1|1|104|2;0|2|95|105|3.");
    let again = stdout(&metra(&["quote", &sample("hello.tm")]));
    assert_eq!(quoted, again.trim());

    let out = metra(&["unquote", quoted]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("q0 _ h q1"), "{text}");
    assert!(text.contains("q1 h R q2"));
    assert!(text.contains("q2 _ i q3"));
}

#[test]
fn unquote_rejects_truncated_codes() {
    let quoted = stdout(&metra(&["quote", &sample("hello.tm")]));
    let quoted = quoted.trim();
    let out = metra(&["unquote", &quoted[..quoted.len() - 1]]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn trials_reports_repeatability_both_ways() {
    let out = metra(&[
        "trials",
        &sample("thermo_reader.tm"),
        "--world",
        &sample("worlds/thermometer.json"),
        "--seeds",
        "0..20",
        "--sigfigs",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let report = &json(&out)["report"];
    assert_eq!(report["repeatable"], serde_json::Value::Bool(false));
    assert!(report["distinct_results"].as_array().unwrap().len() >= 2);
    let truncation = &report["truncation"];
    assert_eq!(truncation["repeatable"], serde_json::Value::Bool(true));
    assert_eq!(truncation["distinct_results"].as_array().unwrap().len(), 1);
}

#[test]
fn trials_on_world_free_machines_are_repeatable() {
    let out = metra(&["trials", &sample("hello.tm"), "--seeds", "0..10", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let report = &json(&out)["report"];
    assert_eq!(report["repeatable"], serde_json::Value::Bool(true));
    assert_eq!(report["trials"].as_array().unwrap().len(), 10);
}

#[test]
fn bad_seed_lists_are_usage_errors() {
    for seeds in ["x..y", "5..5", "1,2,flop", ""] {
        let out = metra(&["trials", &sample("hello.tm"), "--seeds", seeds]);
        assert_eq!(code(&out), 2, "seeds {seeds:?}");
    }
}

#[test]
fn unknown_candidates_are_usage_errors() {
    assert_eq!(code(&metra(&["refute", "--candidate", "psychic"])), 2);
    assert_eq!(code(&metra(&["demo-halting", "--candidate", "psychic"])), 2);
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = metra(&["run", &sample("hello.tm"), "--warp-speed"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn envelopes_carry_reproducibility_fields() {
    let out = metra(&["run", &sample("hello.tm"), "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["tool"], "metra");
    assert_eq!(v["command"], "run");
    assert_eq!(v["seed"], 0);
    assert_eq!(v["budget"], 100_000);
    let digest = v["inputs"]["machine"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn world_seed_is_a_default_for_the_flag() {
    // The thermometer config pins seed 0; --seed overrides it.
    let with_config_seed = metra(&[
        "run",
        &sample("thermo_reader.tm"),
        "--world",
        &sample("worlds/thermometer.json"),
        "--format",
        "json",
    ]);
    assert_eq!(json(&with_config_seed)["seed"], 0);
    let with_flag = metra(&[
        "run",
        &sample("thermo_reader.tm"),
        "--world",
        &sample("worlds/thermometer.json"),
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(json(&with_flag)["seed"], 3);
    assert_ne!(
        json(&with_config_seed)["report"]["result"],
        json(&with_flag)["report"]["result"]
    );
}
