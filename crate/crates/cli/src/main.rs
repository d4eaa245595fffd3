//! `attest`: drive the harness from dataset generation through figure-data
//! export. Every subcommand resolves an experiment config first (from
//! `--config` or `--preset`), so single stages and the full grid agree on
//! seeds, data, and artifact stamps.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use attest_core::derive_seed;
use attest_core::experiment::{
    build_dataset, compute_scores, config_hash, dataset_summary, prepare_dataset, run_experiment,
    train_forests, CellOutcome, DatasetConfig, ExperimentConfig, PreparedDataset, RunResult,
};
use attest_core::io::{
    read_run_result, read_scores_csv, write_dataset_csv, write_dataset_sidecar, write_figure_csvs,
    write_json, write_model_json, write_reasoning_jsonl, write_run_log_csv, write_run_result,
    write_scores_csv, ScoreRow, Stamp,
};
use attest_core::logic::Sample;
use attest_core::mask::{apply_mask, compute_mask};
use attest_core::metrics::{
    gib_violation, logical_correct, nib_violation, statistical_correct, NibVariant, PerClass,
};
use attest_core::oracle::{brute_force_r_min, structural_r_min, OracleBudget, ReasoningSets};
use attest_core::presets::Preset;

#[derive(Parser)]
#[command(name = "attest", version, about = "Attribution trust-test harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file (JSON)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Built-in preset grid: 2inBinary, 2inQuaternary, or 3inBinary
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Master seed (overrides the config file)
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Keep only base folds that reach 100% split-test accuracy
    #[arg(long, global = true)]
    only_100acc: bool,

    /// Evaluate a seeded draw of N distinct samples instead of the full
    /// enumeration (sampled mode for large alphabets)
    #[arg(long, global = true, value_name = "N")]
    sample_size: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write each configured dataset as a CSV with a JSON sidecar
    Generate,
    /// Write ground-truth reasoning sets as JSONL, optionally checking the
    /// structural construction against brute-force search
    Oracle {
        /// Verify structural minimum sets against brute-force enumeration
        #[arg(long)]
        verify: bool,
        /// Samples checked per dataset when the enumeration is large
        #[arg(long, value_name = "N", default_value_t = 500)]
        verify_samples: usize,
    },
    /// Train the base folds; write models, epoch logs, and a summary
    Train,
    /// Write per-fold attribution scores for every configured method
    Attribute,
    /// Write per-fold mask plans for every method and threshold
    Mask,
    /// Run the grid and write per-cell retrained accuracies
    Retrain,
    /// Run the grid and write the machine-readable result
    Evaluate,
    /// Full pipeline: grid, datasets, reasoning sets, and figure data
    Run {
        /// Also emit a plotting script next to the figure CSVs
        #[arg(long)]
        plot_script: bool,
    },
    /// Rebuild figure-data CSVs from a saved run
    Report {
        /// Path to a run.json produced by `evaluate` or `run`
        #[arg(long, value_name = "FILE")]
        run: PathBuf,
        /// Also emit a plotting script next to the figure CSVs
        #[arg(long)]
        plot_script: bool,
    },
    /// Compute score-level metrics for an externally produced score file
    IngestScores {
        /// Score CSV: sample_id,method,score_0..score_{l-1}
        #[arg(long, value_name = "FILE")]
        scores: PathBuf,
        /// Dataset label (name/top) when the config holds several
        #[arg(long, value_name = "LABEL")]
        dataset: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("building the worker pool")?;
    }
    match &cli.command {
        Command::Generate => cmd_generate(&resolve_config(&cli)?, &cli.out),
        Command::Oracle { verify, verify_samples } => {
            cmd_oracle(&resolve_config(&cli)?, &cli.out, *verify, *verify_samples)
        }
        Command::Train => cmd_train(&resolve_config(&cli)?, &cli.out),
        Command::Attribute => cmd_attribute(&resolve_config(&cli)?, &cli.out),
        Command::Mask => cmd_mask(&resolve_config(&cli)?, &cli.out),
        Command::Retrain => cmd_retrain(&resolve_config(&cli)?, &cli.out),
        Command::Evaluate => cmd_evaluate(&resolve_config(&cli)?, &cli.out),
        Command::Run { plot_script } => cmd_run(&resolve_config(&cli)?, &cli.out, *plot_script),
        Command::Report { run, plot_script } => cmd_report(run, &cli.out, *plot_script),
        Command::IngestScores { scores, dataset } => {
            cmd_ingest(&resolve_config(&cli)?, &cli.out, scores, dataset.as_deref())
        }
    }
}

const DEFAULT_SEED: u64 = 17;

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => bail!("--config and --preset are mutually exclusive"),
        (None, None) => bail!("one of --config or --preset is required"),
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        (None, Some(name)) => {
            let preset = Preset::from_name(name)?;
            ExperimentConfig::preset_grid(preset, cli.seed.unwrap_or(DEFAULT_SEED))
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.only_100acc {
        cfg.only_100acc = true;
    }
    if let Some(n) = cli.sample_size {
        cfg.sample_size = Some(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stamp_for(cfg: &ExperimentConfig) -> Result<Stamp> {
    Ok(Stamp { config_hash: config_hash(cfg)?, master_seed: cfg.seed })
}

fn slug(ds: &DatasetConfig) -> String {
    ds.label().replace('/', "_")
}

/// Opens `path` for writing with parent directories created and the
/// provenance comment already written.
fn stamped_file(path: &Path, stamp: &Stamp) -> Result<File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut file = File::create(path)?;
    file.write_all(stamp.comment().as_bytes())?;
    Ok(file)
}

fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let stamp = stamp_for(cfg)?;
    for ds in &cfg.datasets {
        let data = build_dataset(cfg, ds)?;
        let base = slug(ds);
        let csv_path = out.join(format!("dataset_{base}.csv"));
        write_dataset_csv(&csv_path, &data, &stamp)?;
        write_dataset_sidecar(&out.join(format!("dataset_{base}.json")), &data, &stamp)?;
        println!("wrote {} ({} samples)", csv_path.display(), data.samples.len());
    }
    Ok(())
}

fn cmd_oracle(cfg: &ExperimentConfig, out: &Path, verify: bool, verify_samples: usize) -> Result<()> {
    let stamp = stamp_for(cfg)?;
    for ds in &cfg.datasets {
        let spec = ds.spec();
        let domain = ds.domain();
        let data = build_dataset(cfg, ds)?;
        let reasoning: BTreeMap<u64, ReasoningSets> = data
            .samples
            .par_iter()
            .map(|s| Ok((s.id, structural_r_min(&spec, s, &domain)?)))
            .collect::<attest_core::Result<_>>()?;
        let path = out.join(format!("reasoning_{}.jsonl", slug(ds)));
        write_reasoning_jsonl(&path, &reasoning, &stamp)?;
        println!("wrote {} ({} samples)", path.display(), reasoning.len());

        if verify {
            let checked = verify_oracle(cfg, ds, &data.samples, &reasoning, verify_samples)?;
            println!(
                "dataset {}: {checked}/{checked} structural vs brute-force matches",
                ds.label()
            );
        }
    }
    Ok(())
}

fn set_family(sets: &[Vec<usize>]) -> BTreeSet<BTreeSet<usize>> {
    sets.iter().map(|s| s.iter().copied().collect()).collect()
}

/// Compares structural minimum sets against brute-force search on every
/// sample, or on a seeded subset when the enumeration is larger than
/// `limit`. Returns the number of samples checked; any mismatch is an error.
fn verify_oracle(
    cfg: &ExperimentConfig,
    ds: &DatasetConfig,
    samples: &[Sample],
    reasoning: &BTreeMap<u64, ReasoningSets>,
    limit: usize,
) -> Result<usize> {
    let spec = ds.spec();
    let domain = ds.domain();
    let budget = OracleBudget::default();
    let chosen: Vec<&Sample> = if samples.len() <= limit.max(4096) {
        samples.iter().collect()
    } else {
        let seed = derive_seed(cfg.seed, &format!("{}/verify", ds.label()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picks = rand::seq::index::sample(&mut rng, samples.len(), limit).into_vec();
        picks.sort_unstable();
        picks.into_iter().map(|i| &samples[i]).collect()
    };
    let mismatches: Vec<u64> = chosen
        .par_iter()
        .map(|s| {
            let brute = brute_force_r_min(&spec, s, &domain, &budget)?;
            let structural = &reasoning[&s.id];
            Ok((set_family(&structural.r_min) != set_family(&brute.r_min)).then_some(s.id))
        })
        .collect::<attest_core::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if !mismatches.is_empty() {
        bail!(
            "dataset {}: {} of {} samples disagree with brute force (first ids: {:?})",
            ds.label(),
            mismatches.len(),
            chosen.len(),
            &mismatches[..mismatches.len().min(5)]
        );
    }
    Ok(chosen.len())
}

fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let stamp = stamp_for(cfg)?;
    for ds in &cfg.datasets {
        let prep = prepare_dataset(cfg, ds)?;
        let base = slug(ds);
        for fold in &prep.folds {
            let dir = out.join("models").join(&base);
            write_model_json(&dir.join(format!("fold{}.json", fold.fold)), &fold.model, &stamp)?;
            write_run_log_csv(
                &dir.join(format!("fold{}_log.csv", fold.fold)),
                &fold.history,
                &stamp,
            )?;
            let used = if prep.used[fold.fold] { "used" } else { "filtered out" };
            println!(
                "{} fold {}: test accuracy {:.2}% after {} epochs ({used})",
                ds.label(),
                fold.fold,
                100.0 * fold.test_accuracy,
                fold.epochs_run,
            );
        }
        let forests = train_forests(cfg, &prep)?;
        let summary = dataset_summary(ds, &prep, &forests);
        write_json(&out.join(format!("train_{base}.json")), &summary)?;
    }
    Ok(())
}

/// Folds that passed the accuracy filter, with their indices.
fn used_folds(prep: &PreparedDataset) -> Vec<usize> {
    (0..prep.folds.len()).filter(|&f| prep.used[f]).collect()
}

fn cmd_attribute(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let stamp = stamp_for(cfg)?;
    for ds in &cfg.datasets {
        let prep = prepare_dataset(cfg, ds)?;
        let folds = used_folds(&prep);
        if folds.is_empty() {
            println!("{}: no folds pass the accuracy filter, skipping", ds.label());
            continue;
        }
        for f in folds {
            let mut rows = Vec::new();
            for method in cfg.method_names() {
                let table = compute_scores(cfg, &prep, f, &method)?;
                rows.extend(table.into_iter().map(|(sample_id, scores)| ScoreRow {
                    sample_id,
                    method: method.clone(),
                    scores,
                }));
            }
            let path = out.join(format!("scores_{}_fold{f}.csv", slug(ds)));
            write_scores_csv(&path, &rows, &stamp)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
        }
    }
    Ok(())
}

fn cmd_mask(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let stamp = stamp_for(cfg)?;
    for ds in &cfg.datasets {
        let spec = ds.spec();
        let prep = prepare_dataset(cfg, ds)?;
        let folds = used_folds(&prep);
        if folds.is_empty() {
            println!("{}: no folds pass the accuracy filter, skipping", ds.label());
            continue;
        }
        for f in folds {
            let path = out.join(format!("masks_{}_fold{f}.csv", slug(ds)));
            let file = stamped_file(&path, &stamp)?;
            let mut w = csv::Writer::from_writer(file);
            let mut header = vec![
                "sample_id".to_string(),
                "method".to_string(),
                "threshold".to_string(),
                "threshold_value".to_string(),
            ];
            header.extend((0..spec.len()).map(|i| format!("mask_{i}")));
            w.write_record(&header)?;
            let mut rows = 0usize;
            for method in cfg.method_names() {
                let table = compute_scores(cfg, &prep, f, &method)?;
                for rule in &cfg.thresholds {
                    for (id, scores) in &table {
                        let plan = compute_mask(scores, *rule, &spec)?;
                        let mut record = vec![
                            id.to_string(),
                            method.clone(),
                            rule.label(),
                            plan.threshold.to_string(),
                        ];
                        record.extend(plan.mask.iter().map(|&m| u8::from(m).to_string()));
                        w.write_record(&record)?;
                        rows += 1;
                    }
                }
            }
            w.flush()?;
            println!("wrote {} ({rows} rows)", path.display());
        }
    }
    Ok(())
}

fn print_grid_summary(run: &RunResult) {
    let failed = run.failed_cells();
    println!("grid: {} cells, {} failed", run.cells.len(), failed);
    for outcome in &run.cells {
        if let CellOutcome::Failed { key, error } = outcome {
            println!(
                "  failed {}/{} {} {} fold{}: {error}",
                key.dataset, key.top_level, key.method, key.threshold, key.fold
            );
        }
    }
}

fn cmd_retrain(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let stamp = stamp_for(cfg)?;
    let run = run_experiment(cfg)?;
    let path = out.join("retrain_cells.csv");
    let file = stamped_file(&path, &stamp)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "dataset",
        "top_level",
        "method",
        "threshold",
        "fold",
        "status",
        "retrain_epochs",
        "retrained_accuracy",
        "error",
    ])?;
    for outcome in &run.cells {
        let key = outcome.key();
        let mut record = vec![
            key.dataset.clone(),
            key.top_level.to_string(),
            key.method.clone(),
            key.threshold.clone(),
            key.fold.to_string(),
        ];
        match outcome {
            CellOutcome::Ok { cell } => record.extend([
                "ok".to_string(),
                cell.retrain_epochs.to_string(),
                cell.metrics.retrained_accuracy.overall.to_string(),
                String::new(),
            ]),
            CellOutcome::Failed { error, .. } => record.extend([
                "failed".to_string(),
                String::new(),
                String::new(),
                error.clone(),
            ]),
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    print_grid_summary(&run);
    Ok(())
}

fn cmd_evaluate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let run = run_experiment(cfg)?;
    let path = out.join("run.json");
    write_run_result(&path, &run)?;
    println!("wrote {}", path.display());
    print_grid_summary(&run);
    Ok(())
}

fn cmd_run(cfg: &ExperimentConfig, out: &Path, plot_script: bool) -> Result<()> {
    let stamp = stamp_for(cfg)?;
    cmd_generate(cfg, out)?;
    for ds in &cfg.datasets {
        let spec = ds.spec();
        let domain = ds.domain();
        let data = build_dataset(cfg, ds)?;
        let reasoning: BTreeMap<u64, ReasoningSets> = data
            .samples
            .par_iter()
            .map(|s| Ok((s.id, structural_r_min(&spec, s, &domain)?)))
            .collect::<attest_core::Result<_>>()?;
        write_reasoning_jsonl(&out.join(format!("reasoning_{}.jsonl", slug(ds))), &reasoning, &stamp)?;
    }
    let run = run_experiment(cfg)?;
    write_run_result(&out.join("run.json"), &run)?;
    let figures = write_figure_csvs(out, &run)?;
    for path in &figures {
        println!("wrote {}", path.display());
    }
    if plot_script {
        write_plot_script(out)?;
    }
    println!("wrote {}", out.join("run.json").display());
    print_grid_summary(&run);
    Ok(())
}

fn cmd_report(run_path: &Path, out: &Path, plot_script: bool) -> Result<()> {
    let run = read_run_result(run_path)
        .with_context(|| format!("reading {}", run_path.display()))?;
    let figures = write_figure_csvs(out, &run)?;
    for path in &figures {
        println!("wrote {}", path.display());
    }
    if plot_script {
        write_plot_script(out)?;
    }
    Ok(())
}

/// Metrics computable from scores alone: blindness violations, mask
/// fractions, and the accuracy of the masked data under exact evaluation.
/// Retraining-dependent metrics need the full pipeline and are not emitted.
fn cmd_ingest(
    cfg: &ExperimentConfig,
    out: &Path,
    scores_path: &Path,
    dataset: Option<&str>,
) -> Result<()> {
    let ds = match dataset {
        Some(label) => cfg
            .datasets
            .iter()
            .find(|d| d.label() == label || d.name() == label)
            .ok_or_else(|| {
                let known: Vec<String> = cfg.datasets.iter().map(|d| d.label()).collect();
                anyhow::anyhow!("no dataset labeled '{label}' in the config (known: {known:?})")
            })?,
        None if cfg.datasets.len() == 1 => &cfg.datasets[0],
        None => bail!("the config holds several datasets; pick one with --dataset <LABEL>"),
    };
    let spec = ds.spec();
    let domain = ds.domain();
    let data = build_dataset(cfg, ds)?;
    let by_id: BTreeMap<u64, &Sample> = data.samples.iter().map(|s| (s.id, s)).collect();

    let rows = read_scores_csv(scores_path)
        .with_context(|| format!("reading {}", scores_path.display()))?;
    if rows.is_empty() {
        bail!("{} holds no score rows", scores_path.display());
    }
    let mut by_method: BTreeMap<String, Vec<&ScoreRow>> = BTreeMap::new();
    for row in &rows {
        if row.scores.len() != spec.len() {
            bail!(
                "sample {}: {} scores for {} inputs",
                row.sample_id,
                row.scores.len(),
                spec.len()
            );
        }
        if !by_id.contains_key(&row.sample_id) {
            bail!("sample id {} is not in dataset {}", row.sample_id, ds.label());
        }
        by_method.entry(row.method.clone()).or_default().push(row);
    }
    let reasoning: BTreeMap<u64, ReasoningSets> = by_method
        .values()
        .flatten()
        .map(|r| r.sample_id)
        .collect::<BTreeSet<u64>>()
        .into_par_iter()
        .map(|id| Ok((id, structural_r_min(&spec, by_id[&id], &domain)?)))
        .collect::<attest_core::Result<_>>()?;

    let stamp = stamp_for(cfg)?;
    let path = out.join("ingest_metrics.csv");
    let file = stamped_file(&path, &stamp)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "method",
        "threshold",
        "class",
        "nib_strict",
        "nib_coverage",
        "gib",
        "logical_accuracy",
        "statistical_logical_accuracy",
        "mask_fraction",
    ])?;
    for (method, rows) in &by_method {
        for rule in &cfg.thresholds {
            let mut labels = Vec::with_capacity(rows.len());
            let mut nib_strict = Vec::with_capacity(rows.len());
            let mut nib_coverage = Vec::with_capacity(rows.len());
            let mut gib = Vec::with_capacity(rows.len());
            let mut logical = Vec::with_capacity(rows.len());
            let mut statistical = Vec::with_capacity(rows.len());
            let mut fractions = Vec::with_capacity(rows.len());
            for row in rows {
                let sample = by_id[&row.sample_id];
                let sets = &reasoning[&row.sample_id];
                labels.push(sample.label);
                nib_strict.push(nib_violation(&row.scores, sets, &spec, NibVariant::Strict)?);
                nib_coverage.push(nib_violation(&row.scores, sets, &spec, NibVariant::Coverage)?);
                gib.push(gib_violation(&row.scores, sets, &spec)?);
                let plan = compute_mask(&row.scores, *rule, &spec)?;
                let masked = apply_mask(sample, &plan)?;
                logical.push(logical_correct(&spec, &masked, &domain, sample.label)?);
                statistical.push(statistical_correct(&spec, &masked, &domain, sample.label)?);
                fractions.push(100.0 * plan.mask_fraction());
            }
            let columns = [
                PerClass::from_flags(&nib_strict, &labels),
                PerClass::from_flags(&nib_coverage, &labels),
                PerClass::from_flags(&gib, &labels),
                PerClass::from_flags(&logical, &labels),
                PerClass::from_flags(&statistical, &labels),
                PerClass::from_values(&fractions, &labels),
            ];
            for (class, pick) in [
                ("all", 0usize),
                ("0", 1),
                ("1", 2),
            ] {
                let mut record = vec![method.clone(), rule.label(), class.to_string()];
                for col in &columns {
                    let value = match pick {
                        0 => Some(col.overall),
                        1 => col.class0,
                        _ => col.class1,
                    };
                    record.push(value.map(|v| v.to_string()).unwrap_or_default());
                }
                w.write_record(&record)?;
            }
        }
    }
    w.flush()?;
    println!(
        "wrote {} ({} methods x {} thresholds)",
        path.display(),
        by_method.len(),
        cfg.thresholds.len()
    );
    Ok(())
}

fn write_plot_script(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let path = out.join("plot.py");
    fs::write(&path, PLOT_SCRIPT)?;
    println!("wrote {}", path.display());
    Ok(())
}

const PLOT_SCRIPT: &str = r##"#!/usr/bin/env python3
"""Render the figure-data CSVs in this directory as PNG bar charts."""

import csv
import math
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__)) or "."


def load(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def fnum(text):
    return float(text) if text else math.nan


def plot_file(path):
    rows = [r for r in load(path) if r["class"] == "all"]
    if not rows:
        return
    stem = os.path.splitext(os.path.basename(path))[0]
    panels = defaultdict(list)
    for row in rows:
        panels[(row["dataset"], row["top_level"], row["threshold"])].append(row)
    for (dataset, top, threshold), panel in sorted(panels.items()):
        methods = sorted({r["method"] for r in panel})
        series = sorted({r["series"] for r in panel})
        width = 0.8 / max(len(series), 1)
        fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(methods)), 4.0))
        for si, name in enumerate(series):
            means, stds, xs = [], [], []
            for mi, method in enumerate(methods):
                cell = [r for r in panel if r["method"] == method and r["series"] == name]
                means.append(fnum(cell[0]["mean"]) if cell else math.nan)
                stds.append(fnum(cell[0]["std"]) if cell else 0.0)
                xs.append(mi + si * width)
            ax.bar(xs, means, width=width, yerr=stds, capsize=2, label=name)
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(methods))])
        ax.set_xticklabels(methods, rotation=45, ha="right")
        title = f"{stem}: {dataset}/{top}"
        if threshold:
            title += f" @ {threshold}"
        ax.set_title(title)
        ax.legend(fontsize=8)
        fig.tight_layout()
        tslug = threshold.replace(".", "p") if threshold else "none"
        target = os.path.join(HERE, f"{stem}_{dataset}_{top}_{tslug}.png")
        fig.savefig(target, dpi=150)
        plt.close(fig)
        print(f"wrote {target}")


def main():
    names = [n for n in sorted(os.listdir(HERE)) if n.startswith("fig") and n.endswith(".csv")]
    if not names:
        sys.exit("no fig*.csv files next to this script")
    for name in names:
        plot_file(os.path.join(HERE, name))


if __name__ == "__main__":
    main()
"##;
