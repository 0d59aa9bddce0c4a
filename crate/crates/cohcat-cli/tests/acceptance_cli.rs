//! CLI acceptance: every command with a fixed seed reproduces byte-identical
//! reports across consecutive runs, and the exit-code contract holds.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cohcat"))
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("COHCAT_SEED")
        .output()
        .expect("binary runs")
}

fn assert_identical(args: &[&str]) -> Vec<u8> {
    let first = run(args);
    let second = run(args);
    assert_eq!(
        first.status.code(),
        second.status.code(),
        "exit codes differ for {args:?}"
    );
    assert_eq!(
        first.stdout, second.stdout,
        "stdout differs across consecutive runs for {args:?}"
    );
    first.stdout
}

fn state_file(dir: &std::path::Path) -> PathBuf {
    let layout = cohcat::SystemLayout::new(&[("A", 2, "A"), ("B", 2, "B")]).unwrap();
    let rho = cohcat::states::random_density(&layout, 4, 99).unwrap();
    let path = dir.join("state.json");
    std::fs::write(&path, serde_json::to_string(&rho).unwrap()).unwrap();
    path
}

#[test]
fn criterion_10_determinism_and_exit_codes() {
    let dir = std::env::temp_dir().join(format!("cohcat-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let state = state_file(&dir);
    let state = state.to_str().unwrap();

    let command_sets: Vec<Vec<&str>> = vec![
        vec!["catalysis-demo", "--d", "2", "--n", "3", "--seed", "7", "--epsilon", "0"],
        vec![
            "catalysis-demo", "--d", "2", "--n", "2", "--trials", "3", "--seed", "11", "--epsilon",
            "0.01", "--format", "json",
        ],
        vec!["monotonicity-sweep", "--trials", "12", "--seed", "1"],
        vec!["monotonicity-sweep", "--trials", "8", "--seed", "2", "--format", "json"],
        vec!["rates", "--state-file", state],
        vec!["rates", "--state-file", state, "--format", "json"],
        vec!["assisted", "--trials", "6", "--seed", "3"],
        vec!["assisted", "--state-file", state],
        vec!["iqsm", "--trials", "6", "--seed", "4"],
        vec!["iqsm", "--trials", "4", "--seed", "5", "--format", "json"],
    ];
    for args in &command_sets {
        let out = assert_identical(args);
        assert!(!out.is_empty(), "no report for {args:?}");
        let status = run(args).status.code();
        assert_eq!(status, Some(0), "expected success for {args:?}");
    }

    // --out writes the same bytes as stdout
    let out_path = dir.join("report.csv");
    let stdout = assert_identical(&["iqsm", "--trials", "3", "--seed", "9"]);
    let status = bin()
        .args([
            "iqsm", "--trials", "3", "--seed", "9", "--out",
            out_path.to_str().unwrap(),
        ])
        .env_remove("COHCAT_SEED")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(std::fs::read(&out_path).unwrap(), stdout);

    // COHCAT_SEED fallback matches the explicit flag
    let via_env = bin()
        .args(["assisted", "--trials", "5"])
        .env("COHCAT_SEED", "17")
        .output()
        .unwrap();
    let via_flag = run(&["assisted", "--trials", "5", "--seed", "17"]);
    assert_eq!(via_env.stdout, via_flag.stdout, "env seed fallback drifted");

    // config file supplies keys, flags win
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"trials": 4, "seed": 21}"#).unwrap();
    let via_cfg = run(&["assisted", "--config", cfg.to_str().unwrap()]);
    let expect = run(&["assisted", "--trials", "4", "--seed", "21"]);
    assert_eq!(via_cfg.stdout, expect.stdout);
    let overridden = run(&["assisted", "--config", cfg.to_str().unwrap(), "--seed", "22"]);
    let expect = run(&["assisted", "--trials", "4", "--seed", "22"]);
    assert_eq!(overridden.stdout, expect.stdout);

    // an incoherent state reports zero for every measure
    let diag = cohcat::states::DensityOperator::from_diagonal(
        cohcat::SystemLayout::new(&[("A", 2, "A"), ("B", 2, "B")]).unwrap(),
        &[0.1, 0.2, 0.3, 0.4],
    )
    .unwrap();
    let diag_path = dir.join("diag.json");
    std::fs::write(&diag_path, serde_json::to_string(&diag).unwrap()).unwrap();
    let out = run(&["rates", "--state-file", diag_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(value.abs() < 1e-9, "incoherent state scored {line}");
    }

    // usage errors exit 1
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["catalysis-demo", "--n", "9"]).status.code(), Some(1));
    assert_eq!(run(&["catalysis-demo", "--d", "1"]).status.code(), Some(1));
    assert_eq!(run(&["rates"]).status.code(), Some(1));
    assert_eq!(
        run(&["catalysis-demo", "--epsilon", "-0.5"]).status.code(),
        Some(1)
    );

    std::fs::remove_dir_all(&dir).ok();
    println!("acceptance criterion 10: PASS — byte-identical reports across consecutive runs, exit codes 0/1 verified");
}
