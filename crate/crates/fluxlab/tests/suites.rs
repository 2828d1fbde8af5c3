use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;

use fluxlab::{registry, resolve, run_suite, ExperimentConfig, SuiteReport};

/// A coarse run of every suite, shared by the structural checks.
fn coarse() -> &'static (SuiteReport, SuiteReport) {
    static RUNS: OnceLock<(SuiteReport, SuiteReport)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut cfg = ExperimentConfig::new("all", 11);
        cfg.mesh.n = 32;
        cfg.steps = 16;
        cfg.sampler.m = 4;
        cfg.sampler.count = 16;
        (run_suite(&cfg).unwrap(), run_suite(&cfg).unwrap())
    })
}

#[test]
fn rows_are_anchored_and_consistent() {
    let (report, _) = coarse();
    assert!(!report.rows.is_empty());
    for row in &report.rows {
        let (suite, _) = row.check_id.split_once('/').unwrap_or_else(|| panic!("unscoped id {}", row.check_id));
        let s = registry().iter().find(|s| s.name == suite).unwrap_or_else(|| panic!("no suite {suite}"));
        assert!(s.anchors.contains(&row.paper_anchor.as_str()), "{}: {}", row.check_id, row.paper_anchor);
        assert_eq!(row.pass, row.recheck(), "{}", row.check_id);
    }
    for s in registry() {
        assert!(report.rows.iter().any(|r| r.check_id.starts_with(&format!("{}/", s.name))), "{} is silent", s.name);
    }
    let mut ids: Vec<_> = report.rows.iter().map(|r| &r.check_id).collect();
    ids.dedup();
    assert_eq!(ids.len(), report.rows.len());
}

#[test]
fn repeated_runs_agree() {
    let (a, b) = coarse();
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
}

#[test]
fn json_report_round_trips() {
    let (a, _) = coarse();
    let back = SuiteReport::from_json(&a.to_json()).unwrap();
    assert_eq!(back.to_csv().unwrap(), a.to_csv().unwrap());
    assert_eq!(back.config, a.config);
}

#[test]
fn suite_names_resolve() {
    assert_eq!(resolve("all").unwrap().len(), registry().len());
    assert_eq!(resolve("lemma14").unwrap()[0].name, "lemma14-convergence");
    assert!(resolve("nope").is_err());
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fluxlab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn fluxlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fluxlab")).args(args).output().unwrap()
}

#[test]
fn cli_lists_and_describes() {
    let out = fluxlab(&["list-suites"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for s in registry() {
        assert!(text.contains(s.name));
    }
    let out = fluxlab(&["describe-suite", "flux-duality"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Poincaré duality"), "{text}");
    assert_eq!(fluxlab(&["describe-suite", "nope"]).status.code(), Some(2));
}

#[test]
fn cli_exit_code_follows_the_verdict() {
    let dir = scratch("run");
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"suite": "pullback-bound", "seed": 5, "mesh": {"N": 64}, "steps": 16}"#).unwrap();
    let out_dir = dir.join("out");
    let out = fluxlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(out_dir.join("pullback-bound.csv").exists() && out_dir.join("pullback-bound.json").exists());

    std::fs::write(
        &cfg,
        r#"{"suite": "pullback-bound", "seed": 5, "mesh": {"N": 32}, "tolerances": {"functoriality": 0.0}}"#,
    )
    .unwrap();
    let out = fluxlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--mesh", "64"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL pullback-bound"));

    std::fs::write(&cfg, r#"{"suite": "pullback-bound", "mesh": {"N": 32}}"#).unwrap();
    let out = fluxlab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("seed"));
    std::fs::remove_dir_all(&dir).ok();
}
