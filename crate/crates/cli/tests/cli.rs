use std::process::{Command, Output};

use phaselab_cli::{
    failures, render, run, EnsembleKind, Experiment, Format, Overrides, ResultRow, RunConfig, SCHEMA_VERSION, SEED_ENV,
};

const FROZEN: [&str; 9] = ["experiment", "d", "n", "samples", "seed", "value", "stderr", "bound", "pass"];

fn phaselab(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phaselab"));
    cmd.args(args).env_remove(SEED_ENV);
    if let Some(s) = env_seed {
        cmd.env(SEED_ENV, s);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn degenerate_dimension_is_a_usage_error() {
    let out = phaselab(&["joint", "--d", "1"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d must be"));
}

#[test]
fn unknown_flags_and_values_are_usage_errors() {
    assert_eq!(phaselab(&["joint", "--bogus", "1"], None).status.code(), Some(2));
    assert_eq!(phaselab(&["joint", "--format", "xml"], None).status.code(), Some(2));
    assert_eq!(phaselab(&["backassist", "--d", "4"], None).status.code(), Some(2));
    assert_eq!(phaselab(&["design", "--d", "4"], None).status.code(), Some(2));
    assert_eq!(phaselab(&["lemma1", "--n", "3"], None).status.code(), Some(2));
    assert_eq!(phaselab(&["joint", "--d", "2"], Some("not-a-number")).status.code(), Some(2));
}

#[test]
fn csv_layout_is_frozen() {
    let out = phaselab(&["joint", "--d", "4", "--samples", "3", "--seed", "5"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(format!("# schema_version={SCHEMA_VERSION}").as_str()));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..9], &FROZEN);
    let average = lines.find(|l| l.starts_with("joint.average,")).unwrap();
    let fields: Vec<&str> = average.split(',').collect();
    assert!((fields[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(fields[4], "5");
    assert_eq!(fields[8], "true");
}

#[test]
fn json_layout_is_frozen() {
    let out = phaselab(&["design", "--d", "2", "--samples", "2", "--format", "json"], None);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema_version"], SCHEMA_VERSION);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows[0]["experiment"], "design.group_order");
    assert_eq!(rows[0]["value"], 24.0);
    for key in FROZEN {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn seed_precedence_flag_env_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "d = 3\nsamples = 2\nseed = 11\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let seed_of = |o: &Output| stdout(o).lines().nth(2).unwrap().split(',').nth(4).unwrap().to_string();

    let from_file = phaselab(&["joint", "--config", cfg], None);
    assert_eq!(seed_of(&from_file), "11");
    assert!(stdout(&from_file).lines().nth(2).unwrap().starts_with("joint.nonerased,3,"));
    let from_env = phaselab(&["joint", "--config", cfg], Some("12"));
    assert_eq!(seed_of(&from_env), "12");
    let from_flag = phaselab(&["joint", "--config", cfg, "--seed", "13"], Some("12"));
    assert_eq!(seed_of(&from_flag), "13");
    let flag_d = phaselab(&["joint", "--config", cfg, "--d", "2"], None);
    assert!(stdout(&flag_d).lines().nth(2).unwrap().starts_with("joint.nonerased,2,"));
}

#[test]
fn env_seed_matches_flag_seed() {
    let by_flag = phaselab(&["lemma1", "--d", "3", "--samples", "20", "--seed", "77"], None);
    let by_env = phaselab(&["lemma1", "--d", "3", "--samples", "20"], Some("77"));
    assert_eq!(by_flag.stdout, by_env.stdout);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "dimension = 3\n").unwrap();
    let out = phaselab(&["joint", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let args = ["backassist", "--d", "2", "--samples", "2", "--seed", "3"];
    let printed = phaselab(&args, None);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let written = phaselab(&with_file, None);
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), printed.stdout);
}

#[test]
fn clifford_ensemble_runs_where_defined() {
    let out = phaselab(&["lemma1", "--d", "3", "--samples", "50", "--ensemble", "clifford"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(phaselab(&["lemma1", "--d", "4", "--ensemble", "clifford"], None).status.code(), Some(2));
}

#[test]
fn resolve_applies_defaults_and_precedence() {
    let file = Overrides { d: Some(5), seed: Some(1), format: Some(Format::Json), ..Overrides::default() };
    let flags = Overrides { d: Some(3), ..Overrides::default() };
    let cfg = RunConfig::resolve(Experiment::Joint, flags, file, Some("9")).unwrap();
    assert_eq!((cfg.d, cfg.seed, cfg.format), (3, 9, Format::Json));
    assert_eq!(cfg.samples, Experiment::Joint.defaults().2);
    assert_eq!(cfg.ensemble, EnsembleKind::Haar);
    assert!(Overrides::from_toml("ensemble = \"clifford\"\nthreads = 2\n").is_ok());
    assert!(Overrides::from_toml("ensemble = \"unitary\"\n").is_err());
}

#[test]
fn vacuous_bound_is_flagged_for_small_d() {
    let cfg = RunConfig::resolve(
        Experiment::Lemma1,
        Overrides { d: Some(2), samples: Some(40), ..Overrides::default() },
        Overrides::default(),
        None,
    )
    .unwrap();
    let rows = run(&cfg).unwrap();
    let exact = rows.iter().find(|r| r.experiment == "lemma1.expected_purity_exact").unwrap();
    assert!((exact.value - 7.0 / 9.0).abs() < 1e-12);
    assert_eq!(exact.note, "bound vacuous (d<6)");
}

#[test]
fn lemma1_passes_at_d9() {
    let cfg = RunConfig::resolve(
        Experiment::Lemma1,
        Overrides { samples: Some(100), ..Overrides::default() },
        Overrides::default(),
        None,
    )
    .unwrap();
    let rows = run(&cfg).unwrap();
    let entropy = rows.iter().find(|r| r.experiment == "lemma1.entropy_mean").unwrap();
    assert!((entropy.bound - 1.1699250014423122).abs() < 1e-12);
    assert!(failures(&rows).is_empty());
}

#[test]
fn failing_rows_are_reported() {
    let row = |pass| ResultRow {
        experiment: "x.y".into(),
        d: 2,
        n: 1,
        samples: 1,
        seed: 0,
        value: 1.0,
        stderr: None,
        bound: 0.0,
        pass,
        note: String::new(),
    };
    let rows = vec![row(true), row(false)];
    assert_eq!(failures(&rows), vec!["x.y"]);
    let json = render(&rows, Format::Json).unwrap();
    assert!(json.contains("\"stderr\": null"));
    assert!(render(&rows, Format::Csv).unwrap().lines().nth(2).unwrap().contains(",,"));
}
