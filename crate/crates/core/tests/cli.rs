use std::path::Path;
use std::process::{Command, Output};

fn gdn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

#[test]
fn filter_response_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gdn(
        &["filter-response", "--kind", "heat", "--order", "3", "--points", "5"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(tmp.path().join("filter_response.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "lambda,truncated,exact");
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[1], "0,1,1");
    assert!(rows[5].starts_with("2,-0.333333,0.135335"), "{}", rows[5]);
}

#[test]
fn inverse_gcn_pole_leaves_exact_blank() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gdn(
        &[
            "filter-response",
            "--kind",
            "inverse_gcn",
            "--order",
            "2",
            "--points",
            "3",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let table = std::fs::read_to_string(tmp.path().join("filter_response.csv")).unwrap();
    assert_eq!(table.lines().nth(2), Some("1,3,"));
}

#[test]
fn train_writes_a_loadable_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gdn(&["train", "--per-class", "3", "--epochs", "1"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    gdn_core::params::ParamStore::load(&tmp.path().join("params.txt")).unwrap();
    let emb = std::fs::read_to_string(tmp.path().join("embeddings.csv")).unwrap();
    assert_eq!(emb.lines().count(), 7);
    assert_eq!(emb.lines().next().unwrap().split(',').count(), 513);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "encoder.hiden = 8\n").unwrap();
    let out = gdn(
        &["train", "--config", cfg.to_str().unwrap(), "--per-class", "3"],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("encoder.hiden"));
}

#[test]
fn malformed_ratings_report_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let ratings = tmp.path().join("r.csv");
    std::fs::write(&ratings, "0,0,4\n0,1,x\n").unwrap();
    let out = gdn(&["recsys", "--ratings", ratings.to_str().unwrap()], tmp.path());
    assert!(!out.status.success());
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("r.csv:2:"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
