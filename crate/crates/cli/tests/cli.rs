use japdr_core::aiger::parse_witness;
use japdr_core::report::from_json;
use japdr_core::{parse, replay_trace, VerdictStatus};
use std::path::Path;
use std::process::{Command, Output};

fn japdr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_japdr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gen_counter(dir: &Path, bits: usize, name: &str) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let out = japdr(&["gen-counter", "--bits", &bits.to_string(), "-o", &path]);
    assert!(out.status.success());
    path
}

#[test]
fn check_counter_text_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_counter(dir.path(), 8, "c8.aag");
    let out = japdr(&["check", &f]);
    assert_eq!(out.status.code(), Some(10));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FailsLocal"));
    assert!(text.contains("HoldsLocal"));
    assert!(text.contains("debugging set: {0}"));
}

#[test]
fn json_report_and_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_counter(dir.path(), 6, "c6.aig");
    let wdir = dir.path().join("wit");
    let out = japdr(&[
        "check",
        &f,
        "--report",
        "json",
        "--witness-dir",
        wdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(10));
    let rep = from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rep.debugging_set, vec![0]);
    let (c, props) = parse(&std::fs::read(&f).unwrap()).unwrap();
    for v in &rep.verdicts {
        let name = v.witness_file.as_ref().unwrap();
        let w = parse_witness(&c, &std::fs::read(wdir.join(name)).unwrap()).unwrap();
        assert_eq!(w.properties, vec![v.index]);
        if let Some(t) = w.trace {
            let others: Vec<_> = props
                .iter()
                .filter(|p| p.index != v.index)
                .copied()
                .collect();
            assert!(replay_trace(&c, &t, &others).is_valid());
        }
    }
}

#[test]
fn csv_report_header() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_counter(dir.path(), 4, "c4.aag");
    let out = japdr(&["check", &f, "--report", "csv", "--mode", "joint"]);
    assert_eq!(out.status.code(), Some(10));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("index,kind,status,time_s,frames,sat_calls,witness_file")
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn etf_flag_confirms_failure() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_counter(dir.path(), 5, "c5.aag");
    let out = japdr(&["check", &f, "--etf", "0", "--report", "json"]);
    let rep = from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rep.verdict(0).unwrap().status, VerdictStatus::EtfConfirmed);
    // with P0 no longer assumed, P1 fails locally
    assert_eq!(rep.verdict(1).unwrap().status, VerdictStatus::FailsLocal);
    assert_eq!(out.status.code(), Some(10));
}

#[test]
fn timeout_gives_unknown_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_counter(dir.path(), 40, "c40.aag");
    let order = dir.path().join("order.txt");
    std::fs::write(&order, "1\n").unwrap();
    let out = japdr(&[
        "check",
        &f,
        "--mode",
        "sep-global",
        "--etf",
        "0",
        "--order",
        order.to_str().unwrap(),
        "--per-prop-timeout",
        "0.2",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Unknown"), "{text}");
    // P0 failing as expected is not a failure, so the timeout decides the exit code
    assert_eq!(out.status.code(), Some(20), "{text}");
}

#[test]
fn all_properties_hold_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.aag");
    let out = japdr(&[
        "gen-counter",
        "--bits",
        "4",
        "--thresholds",
        "3",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = japdr(&["check", path.to_str().unwrap(), "--mode", "sep-global"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn clause_db_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.aag");
    japdr(&[
        "gen-counter",
        "--bits",
        "4",
        "--thresholds",
        "3",
        "-o",
        path.to_str().unwrap(),
    ]);
    let db = dir.path().join("db.txt");
    for _ in 0..2 {
        let out = japdr(&[
            "check",
            path.to_str().unwrap(),
            "--mode",
            "sep-global",
            "--clause-db",
            db.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&db).unwrap();
    assert!(text.starts_with("japdr-clausedb v1 "));
}

#[test]
fn bmc_and_oracle_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_counter(dir.path(), 4, "c4.aag");
    let out = japdr(&["bmc", &f, "--property", "1", "--max-depth", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let out = japdr(&["bmc", &f, "--property", "1", "--max-depth", "9"]);
    assert_eq!(out.status.code(), Some(10));
    assert!(String::from_utf8(out.stdout).unwrap().contains("depth 9"));
    let out = japdr(&["bmc", &f, "--property", "1", "--max-depth", "20", "--local"]);
    assert_eq!(out.status.code(), Some(0));
    let out = japdr(&["oracle", &f]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("debugging set: {0}"));
    let out = japdr(&["oracle", &f, "--semantics", "global"]);
    assert_eq!(out.status.code(), Some(10));
}

#[test]
fn gen_random_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, name) in [(1, "r.aag"), (2, "r.aig")] {
        let path = dir.path().join(name);
        let out = japdr(&[
            "gen-random",
            "--seed",
            &seed.to_string(),
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        parse(&std::fs::read(&path).unwrap()).unwrap();
        let out = japdr(&["check", path.to_str().unwrap()]);
        assert!(matches!(out.status.code(), Some(0 | 10)));
    }
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.aag");
    std::fs::write(&bad, "aag 1 0 0 0\n").unwrap();
    assert_eq!(
        japdr(&["check", bad.to_str().unwrap()]).status.code(),
        Some(3)
    );
    assert_eq!(japdr(&["check", "/nonexistent.aag"]).status.code(), Some(3));
    let f = gen_counter(dir.path(), 3, "c.aag");
    assert_eq!(
        japdr(&["check", &f, "--mode", "bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(
        japdr(&["check", &f, "--per-prop-timeout", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(japdr(&["check", &f, "--etf", "7"]).status.code(), Some(2));
    assert_eq!(japdr(&[]).status.code(), Some(2));
}

#[test]
fn json_reports_match_schema_and_roundtrip() {
    let schema: serde_json::Value = serde_json::from_str(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/report.schema.json"
    )))
    .unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let f = gen_counter(dir.path(), 6, "c6.aag");
    let wdir = dir.path().join("w");
    let runs: [&[&str]; 5] = [
        &["--witness-dir", wdir.to_str().unwrap()],
        &["--mode", "joint"],
        &["--mode", "sep-global", "--lifting", "respect"],
        &["--etf", "0", "--reuse-clauses", "off"],
        &[
            "--mode",
            "sep-global",
            "--per-prop-timeout",
            "0.01",
            "--total-timeout",
            "5",
        ],
    ];
    for extra in runs {
        let mut args = vec!["check", f.as_str(), "--report", "json"];
        args.extend_from_slice(extra);
        let text = String::from_utf8(japdr(&args).stdout).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> = validator
            .iter_errors(&value)
            .map(|e| e.to_string())
            .collect();
        assert!(errors.is_empty(), "{extra:?}: {errors:?}");
        let rep = from_json(&text).unwrap();
        assert_eq!(
            japdr_core::report::to_json(&rep),
            text.trim_end(),
            "{extra:?}"
        );
    }
}
