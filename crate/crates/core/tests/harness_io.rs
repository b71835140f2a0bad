//! Config loading, run directories, aggregates and the command-line tool.

use std::path::Path;
use std::process::Command;

use organic_overlay::harness::{
    aggregate, run_experiment, ExperimentConfig, ExperimentKind, HarnessError, PlotKind, Trace,
};

const MINIMAL_CYCLES: &str = r#"
schema_version = 1
experiment = "adaptation_cycles"
seed = 5

[[schedule]]
gamma = 2.1
sweeps = 10

[[schedule]]
gamma = 3.5
sweeps = 10
"#;

#[test]
fn minimal_config_fills_defaults_and_round_trips() {
    let c = ExperimentConfig::from_toml_str(MINIMAL_CYCLES).unwrap();
    assert_eq!(c.experiment, ExperimentKind::AdaptationCycles);
    assert_eq!(c.schedule.len(), 2);
    assert_eq!(c.schedule[1].gamma, 3.5);
    assert_eq!(c.n, 2000);
    assert_eq!(c.replicas, 10);
    let echo = c.to_toml_string();
    assert!(echo.contains("[anneal]"));
    let again = ExperimentConfig::from_toml_str(&echo).unwrap();
    assert_eq!(again, c);
}

fn config_error(text: &str) -> String {
    match ExperimentConfig::from_toml_str(text) {
        Err(e @ HarnessError::Config(_)) => {
            assert_eq!(e.exit_code(), 2);
            e.to_string()
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn unknown_keys_are_listed() {
    let msg = config_error(
        "experiment = \"spectrum_report\"\nbogus = 1\n[spectrum]\nbins = 10\ncolour = 3\n",
    );
    assert!(msg.contains("bogus"), "{msg}");
    assert!(msg.contains("spectrum.colour"), "{msg}");
}

#[test]
fn invariant_violations_name_the_field() {
    let msg = config_error("experiment = \"ensemble_converge\"\n[rewire]\ngamma = 1.5\n");
    assert!(msg.contains("gamma must exceed 2"), "{msg}");
    let msg = config_error("experiment = \"anneal_equilibrate\"\nreplicas = 0\n");
    assert!(msg.contains("replicas"), "{msg}");
    let msg =
        config_error("experiment = \"adaptation_cycles\"\n[[schedule]]\ngamma = 1.9\nsweeps = 3\n");
    assert!(msg.contains("gamma must exceed 2"), "{msg}");
}

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::for_experiment(kind);
    c.n = 150;
    c.replicas = 3;
    c.seed = 21;
    c
}

fn read_trace(path: &Path) -> Trace {
    Trace::read_csv(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn aggregate_equals_recomputation_from_replica_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(ExperimentKind::AnnealEquilibrate);
    let out = run_experiment(&c, dir.path()).unwrap();
    assert_eq!(out.manifest.completed_replicas, 3);
    assert_eq!(out.manifest.completeness, 1.0);
    let replicas: Vec<Trace> = (0..3)
        .map(|k| read_trace(&dir.path().join(format!("replica_{k:03}.csv"))))
        .collect();
    let stored = read_trace(&dir.path().join("aggregate.csv"));
    let recomputed = aggregate(&replicas).unwrap();
    assert_eq!(stored.columns, recomputed.columns);
    for (a, b) in stored.rows.iter().zip(&recomputed.rows) {
        for (x, y) in a.iter().zip(b) {
            assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }
    // Round 0, the configured rounds and the post-shock rounds.
    assert_eq!(
        replicas[0].rows.len(),
        1 + c.anneal.rounds + c.anneal.post_shock_rounds
    );
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let c = small(ExperimentKind::AdaptationCycles);
    run_experiment(&c, a.path()).unwrap();
    run_experiment(&c, b.path()).unwrap();
    for name in [
        "replica_000.csv",
        "aggregate.csv",
        "markers.csv",
        "gamma_f_vs_sweep.dat",
        "summary.json",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    let text = std::fs::read_to_string(a.path().join("aggregate.csv")).unwrap();
    assert!(!text.contains('\r'));
}

#[test]
fn adaptation_run_writes_markers_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(ExperimentKind::AdaptationCycles);
    run_experiment(&c, dir.path()).unwrap();
    let markers = read_trace(&dir.path().join("markers.csv"));
    assert_eq!(markers.rows.len(), c.schedule.len());
    assert_eq!(markers.rows[0][3], c.schedule[0].sweeps as f64);
    let plot = std::fs::read_to_string(dir.path().join("gamma_f_vs_sweep.dat")).unwrap();
    assert!(plot.starts_with('#'));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn attack_run_writes_survivors_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(ExperimentKind::AttackCompare);
    run_experiment(&c, dir.path()).unwrap();
    for gamma in &c.attack.gammas {
        assert!(dir
            .path()
            .join(format!("survivors_gamma_{gamma}.edges"))
            .exists());
    }
    let cmp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("comparison.json")).unwrap())
            .unwrap();
    assert!(cmp["giant_larger_at_highest_gamma"].is_boolean());
}

#[test]
fn plot_kinds_parse() {
    assert!("gamma_f_vs_sweep".parse::<PlotKind>().is_ok());
    assert!("degree_ccdf".parse::<PlotKind>().is_ok());
    assert!(matches!(
        "pie_chart".parse::<PlotKind>(),
        Err(HarnessError::UnknownPlotKind(_))
    ));
}

fn overlaylab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_overlaylab"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("spec");
    let ok = overlaylab(&[
        "spectrum",
        "--n",
        "120",
        "--replicas",
        "2",
        "--seed",
        "3",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(out_dir.join("manifest.json").exists());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"spectrum_report\"\nwhatever = true\n").unwrap();
    let code = overlaylab(&["--config", bad.to_str().unwrap(), "spectrum"])
        .status
        .code();
    assert_eq!(code, Some(2));

    let code = overlaylab(&["rewire", "--gamma", "1.5"]).status.code();
    assert_eq!(code, Some(2));

    let missing = dir.path().join("nothing");
    let code = overlaylab(&[
        "report",
        "--run-dir",
        missing.to_str().unwrap(),
        "--plot",
        "ks_d_vs_sweep",
    ])
    .status
    .code();
    assert_eq!(code, Some(3));
}

#[test]
fn cli_generate_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = overlaylab(&[
        "generate",
        "--model",
        "zeta",
        "--n",
        "500",
        "--gamma",
        "2.5",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("graph.edges")).unwrap();
    assert!(text.starts_with('#'));
    let report = overlaylab(&["report", "--model", "zeta", "--gamma", "3.2"]);
    let v: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert!((v["critical_failure_fraction"].as_f64().unwrap() - 0.6365).abs() < 1e-3);
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}
