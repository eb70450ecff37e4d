use std::path::Path;
use std::process::{Command, Output};

fn qsmpc(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsmpc"))
        .args(args)
        .env("QSMPC_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn replay_toy_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsmpc(&["replay-toy"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["body"]["kind"], "replay");
}

#[test]
fn tampered_fixture_exits_one_and_names_step() {
    let dir = tempfile::tempdir().unwrap();
    let text = qsmpc_harness::fixture::TOY_FIXTURE_JSON
        .replace("\"k_b\": \"101001110001\"", "\"k_b\": \"111001110001\"");
    let fx = write(dir.path(), "fx.json", &text);
    let out = qsmpc(&["replay-toy", "--fixture", &fx], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["body"]["first_divergence"], "S' = QOTP_KB(S)");
}

#[test]
fn non_prime_mpsi_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.json",
        r#"{"protocol":"mpsi","modulus":8,"sets":[[1],[1]]}"#,
    );
    let out = qsmpc(&["mpsi-run", "--scenario", &s], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd prime"));
}

#[test]
fn protocol_mismatch_and_bad_json_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"protocol":"ole","modulus":8}"#);
    assert_eq!(
        qsmpc(&["mpsi-run", "--scenario", &s], dir.path())
            .status
            .code(),
        Some(2)
    );
    let bad = write(dir.path(), "b.json", "{not json");
    assert_eq!(
        qsmpc(&["ole-run", "--scenario", &bad], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn ole_run_writes_report_and_transcript_to_default_dir() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.json",
        r#"{"protocol":"ole","modulus":101,"seed":4}"#,
    );
    let out = qsmpc(
        &[
            "ole-run",
            "--scenario",
            &s,
            "--trials",
            "20",
            "--delta",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ole-4.json")).unwrap())
            .unwrap();
    assert_eq!(report["seed"], 4);
    assert_eq!(report["scenario_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(report["body"]["aggregate"]["trials"], 20);
    let transcript = std::fs::read_to_string(dir.path().join("ole-4.transcript.jsonl")).unwrap();
    // Per session: 4 quantum messages, 4 decoy disclosures, 4 checks, 1 output.
    assert_eq!(transcript.lines().count(), 20 * 13);
}

#[test]
fn out_flag_overrides_destination() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.json",
        r#"{"protocol":"mpsi","modulus":101,"sets":[[1],[1]],"trials":2}"#,
    );
    let target = dir.path().join("nested/r.json");
    let out = qsmpc(
        &[
            "mpsi-run",
            "--scenario",
            &s,
            "--u-degree",
            "paper",
            "--out",
            target.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(target.exists());
    assert!(dir.path().join("nested/r.transcript.jsonl").exists());
}
