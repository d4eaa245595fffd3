//! Drives the installed binary end to end: artifact layout, determinism
//! across reruns, report reconstruction, score ingestion, and the
//! machine-readable error contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use attest_core::attribution::{Method, MethodSpec};
use attest_core::experiment::{DatasetConfig, ExperimentConfig};
use attest_core::io::{write_scores_csv, ScoreRow, Stamp};
use attest_core::logic::{enumerate_dataset, GateKind};
use attest_core::mask::ThresholdRule;
use attest_core::oracle::{oracle_scores, structural_r_min};
use attest_core::presets::Preset;

fn attest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_config_file(dir: &Path) -> String {
    let mut cfg = ExperimentConfig::preset_grid(Preset::TwoInBinary, 11);
    cfg.datasets = vec![DatasetConfig::Preset {
        preset: Preset::TwoInBinary,
        top_level: GateKind::And,
    }];
    cfg.methods = vec![MethodSpec::new(Method::Gradient)];
    cfg.thresholds = vec![ThresholdRule::BaselineMax];
    cfg.hidden_layers = vec![16];
    cfg.train.folds = 2;
    cfg.train.max_epochs = 400;
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_config_reports_a_machine_readable_error() {
    let out = attest(&["generate"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert!(parsed["error"].as_str().unwrap().contains("--config"));
}

#[test]
fn generate_writes_the_full_enumeration_per_top_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = attest(&["generate", "--preset", "2inBinary", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for top in ["and", "or", "xor"] {
        let csv = fs::read_to_string(dir.path().join(format!("dataset_2inBinary_{top}.csv"))).unwrap();
        let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, 257, "header plus one row per sample");
        assert!(csv.starts_with("# config_hash="));
        assert!(dir.path().join(format!("dataset_2inBinary_{top}.json")).exists());
    }
}

#[test]
fn run_report_and_reruns_agree_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config_file(dir.path());
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    for out in [&first, &second] {
        let run = attest(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }

    let figures = [
        "fig3_forest_importance.csv",
        "fig4_nib.csv",
        "fig5_performance.csv",
        "fig6_full_dca.csv",
        "fig7_dca_summary.csv",
    ];
    for name in figures.iter().chain(&["run.json", "dataset_2inBinary_and.csv"]) {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let reported = dir.path().join("reported");
    let report = attest(&[
        "report",
        "--run",
        first.join("run.json").to_str().unwrap(),
        "--out",
        reported.to_str().unwrap(),
        "--plot-script",
    ]);
    assert!(report.status.success(), "{}", String::from_utf8_lossy(&report.stderr));
    for name in &figures {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(reported.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between run and report");
    }
    assert!(reported.join("plot.py").exists());
}

#[test]
fn ingested_ground_truth_scores_come_back_clean() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config_file(dir.path());

    let preset = Preset::TwoInBinary;
    let spec = preset.spec(GateKind::And);
    let domain = preset.domain();
    let data = enumerate_dataset(&spec, &domain, 1 << 20).unwrap();
    let rows: Vec<ScoreRow> = data
        .samples
        .iter()
        .map(|s| ScoreRow {
            sample_id: s.id,
            method: "external".to_string(),
            scores: oracle_scores(&spec, &structural_r_min(&spec, s, &domain).unwrap()),
        })
        .collect();
    let scores_path = dir.path().join("external_scores.csv");
    let stamp = Stamp { config_hash: "external".to_string(), master_seed: 0 };
    write_scores_csv(&scores_path, &rows, &stamp).unwrap();

    let out = attest(&[
        "ingest-scores",
        "--config",
        &config,
        "--scores",
        scores_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let table = fs::read_to_string(dir.path().join("ingest_metrics.csv")).unwrap();
    let all_row: Vec<&str> = table
        .lines()
        .find(|l| l.starts_with("external,baseline_max,all"))
        .expect("aggregate row present")
        .split(',')
        .collect();
    // columns: method,threshold,class,nib_strict,nib_coverage,gib,logical,statistical,mask_fraction
    assert_eq!(&all_row[3..8], &["0", "0", "0", "100", "100"]);
    let fraction: f64 = all_row[8].parse().unwrap();
    assert!((fraction - 100.0 * 196.0 / 256.0).abs() < 1e-9);
}
