//! File artifacts: dataset tables, score files, reasoning sets, model
//! checkpoints, run logs, the master run index, and the five figure tables.
//! Every file starts with (or embeds) the config hash and master seed, and
//! identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{CellResult, RunResult};
use crate::logic::Dataset;
use crate::metrics::{MetricsReport, PerClass};
use crate::net::NetModel;
use crate::oracle::ReasoningSets;
use crate::train::EpochLog;

/// Provenance written into every artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stamp {
    pub config_hash: String,
    pub master_seed: u64,
}

impl Stamp {
    pub fn comment(&self) -> String {
        format!("# config_hash={} master_seed={}\n", self.config_hash, self.master_seed)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// `input_0..input_{l-1},label` rows with exact rational values, preceded by
/// a `#` provenance comment.
pub fn write_dataset_csv(path: &Path, data: &Dataset, stamp: &Stamp) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(stamp.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    let l = data.spec.len();
    let mut header: Vec<String> = (0..l).map(|i| format!("input_{i}")).collect();
    header.push("label".to_string());
    w.write_record(&header)?;
    for sample in &data.samples {
        let mut row: Vec<String> = sample.inputs.iter().map(|v| v.to_string()).collect();
        row.push(sample.label.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Self-describing companion for a dataset CSV.
pub fn write_dataset_sidecar(path: &Path, data: &Dataset, stamp: &Stamp) -> Result<()> {
    #[derive(Serialize)]
    struct Sidecar<'a> {
        config_hash: &'a str,
        master_seed: u64,
        spec: &'a crate::logic::FormulaSpec,
        domain: &'a crate::logic::Domain,
        samples: usize,
    }
    write_json(
        path,
        &Sidecar {
            config_hash: &stamp.config_hash,
            master_seed: stamp.master_seed,
            spec: &data.spec,
            domain: &data.domain,
            samples: data.samples.len(),
        },
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub sample_id: u64,
    pub method: String,
    pub scores: Vec<f64>,
}

/// `sample_id,method,score_0..score_{l-1}` rows.
pub fn write_scores_csv(path: &Path, rows: &[ScoreRow], stamp: &Stamp) -> Result<()> {
    let l = match rows.first() {
        Some(row) => row.scores.len(),
        None => return Err(Error::input("no score rows to write")),
    };
    let mut out = create(path)?;
    out.write_all(stamp.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sample_id".to_string(), "method".to_string()];
    header.extend((0..l).map(|i| format!("score_{i}")));
    w.write_record(&header)?;
    for row in rows {
        if row.scores.len() != l {
            return Err(Error::input("score rows have mixed lengths"));
        }
        let mut record = vec![row.sample_id.to_string(), row.method.clone()];
        record.extend(row.scores.iter().map(|s| s.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a score file in the `write_scores_csv` format; `#` lines and the
/// header are skipped, so externally produced files also load.
pub fn read_scores_csv(path: &Path) -> Result<Vec<ScoreRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(BufReader::new(File::open(path)?));
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() < 3 {
            return Err(Error::input("score rows need sample_id, method, and scores"));
        }
        let sample_id: u64 = record[0]
            .parse()
            .map_err(|_| Error::input(format!("bad sample id '{}'", &record[0])))?;
        let mut scores = Vec::with_capacity(record.len() - 2);
        for field in record.iter().skip(2) {
            scores.push(
                field
                    .parse::<f64>()
                    .map_err(|_| Error::input(format!("bad score '{field}'")))?,
            );
        }
        rows.push(ScoreRow { sample_id, method: record[1].to_string(), scores });
    }
    Ok(rows)
}

/// One JSON object per line: a stamp line, then one line per sample.
pub fn write_reasoning_jsonl(
    path: &Path,
    reasoning: &BTreeMap<u64, ReasoningSets>,
    stamp: &Stamp,
) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer(&mut out, stamp)?;
    out.write_all(b"\n")?;
    for sets in reasoning.values() {
        serde_json::to_writer(&mut out, sets)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_model_json(path: &Path, model: &NetModel, stamp: &Stamp) -> Result<()> {
    #[derive(Serialize)]
    struct Checkpoint<'a> {
        config_hash: &'a str,
        master_seed: u64,
        model: &'a NetModel,
    }
    write_json(
        path,
        &Checkpoint { config_hash: &stamp.config_hash, master_seed: stamp.master_seed, model },
    )
}

pub fn write_run_log_csv(path: &Path, history: &[EpochLog], stamp: &Stamp) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(stamp.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "mean_loss", "train_accuracy", "val_accuracy"])?;
    for log in history {
        w.write_record([
            log.epoch.to_string(),
            log.mean_loss.to_string(),
            log.train_accuracy.to_string(),
            log.val_accuracy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The master index for a grid run.
pub fn write_run_result(path: &Path, run: &RunResult) -> Result<()> {
    write_json(path, run)
}

pub fn read_run_result(path: &Path) -> Result<RunResult> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

const FIGURE_HEADER: [&str; 8] =
    ["dataset", "top_level", "method", "threshold", "class", "series", "mean", "std"];

struct FigureRow {
    dataset: String,
    top_level: String,
    method: String,
    threshold: String,
    class: &'static str,
    series: String,
    stat: Option<(f64, f64)>,
}

impl FigureRow {
    fn record(&self) -> [String; 8] {
        let (mean, std) = match self.stat {
            Some((m, s)) => (m.to_string(), s.to_string()),
            None => (String::new(), String::new()),
        };
        [
            self.dataset.clone(),
            self.top_level.clone(),
            self.method.clone(),
            self.threshold.clone(),
            self.class.to_string(),
            self.series.clone(),
            mean,
            std,
        ]
    }
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn per_class_rows(
    rows: &mut Vec<FigureRow>,
    base: &FigureRow,
    series: &str,
    reports: &[&MetricsReport],
    get: impl Fn(&MetricsReport) -> PerClass,
) {
    let all: Vec<f64> = reports.iter().map(|r| get(r).overall).collect();
    let class0: Vec<f64> = reports.iter().filter_map(|r| get(r).class0).collect();
    let class1: Vec<f64> = reports.iter().filter_map(|r| get(r).class1).collect();
    for (class, values) in [("all", all), ("0", class0), ("1", class1)] {
        rows.push(FigureRow {
            class,
            series: series.to_string(),
            stat: mean_std(&values),
            ..clone_base(base)
        });
    }
}

fn clone_base(base: &FigureRow) -> FigureRow {
    FigureRow {
        dataset: base.dataset.clone(),
        top_level: base.top_level.clone(),
        method: base.method.clone(),
        threshold: base.threshold.clone(),
        class: "all",
        series: String::new(),
        stat: None,
    }
}

fn write_figure_csv(path: &Path, rows: &[FigureRow], stamp: &Stamp) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(stamp.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIGURE_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Grid cells grouped across folds, in first-seen order.
fn grouped_cells(run: &RunResult) -> Vec<((String, String, String, String), Vec<&CellResult>)> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(String, String, String, String), Vec<&CellResult>> = BTreeMap::new();
    for outcome in &run.cells {
        let Some(cell) = outcome.cell() else { continue };
        let key = (
            cell.key.dataset.clone(),
            cell.key.top_level.to_string(),
            cell.key.method.clone(),
            cell.key.threshold.clone(),
        );
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(cell);
    }
    order.into_iter().map(|key| (key.clone(), groups[&key].clone())).collect()
}

/// Emits the five figure tables and returns their paths.
pub fn write_figure_csvs(dir: &Path, run: &RunResult) -> Result<Vec<PathBuf>> {
    let stamp = Stamp { config_hash: run.config_hash.clone(), master_seed: run.master_seed };
    let groups = grouped_cells(run);
    let base_for = |key: &(String, String, String, String)| FigureRow {
        dataset: key.0.clone(),
        top_level: key.1.clone(),
        method: key.2.clone(),
        threshold: key.3.clone(),
        class: "all",
        series: String::new(),
        stat: None,
    };

    let mut forest_rows = Vec::new();
    for ds in &run.datasets {
        if ds.forests.is_empty() {
            continue;
        }
        let l = ds.forests[0].importances.len();
        let base = FigureRow {
            dataset: ds.dataset.clone(),
            top_level: ds.top_level.to_string(),
            method: "forest_gini".to_string(),
            threshold: String::new(),
            class: "all",
            series: String::new(),
            stat: None,
        };
        for i in 0..l {
            let values: Vec<f64> = ds.forests.iter().map(|f| f.importances[i]).collect();
            forest_rows.push(FigureRow {
                series: format!("input_{i}"),
                stat: mean_std(&values),
                ..clone_base(&base)
            });
        }
        let acc: Vec<f64> = ds.forests.iter().map(|f| f.test_accuracy * 100.0).collect();
        forest_rows.push(FigureRow {
            series: "test_accuracy".to_string(),
            stat: mean_std(&acc),
            ..clone_base(&base)
        });
    }

    let mut nib_rows = Vec::new();
    let mut perf_rows = Vec::new();
    let mut full_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for (key, cells) in &groups {
        let base = base_for(key);
        let reports: Vec<&MetricsReport> = cells.iter().map(|c| &c.metrics).collect();

        per_class_rows(&mut nib_rows, &base, "nib_strict", &reports, |r| r.nib_strict);
        per_class_rows(&mut nib_rows, &base, "nib_coverage", &reports, |r| r.nib_coverage);
        per_class_rows(&mut nib_rows, &base, "gib", &reports, |r| r.gib);

        per_class_rows(&mut perf_rows, &base, "retrained_accuracy", &reports, |r| {
            r.retrained_accuracy
        });
        per_class_rows(&mut perf_rows, &base, "logical_accuracy", &reports, |r| {
            r.logical_accuracy
        });
        per_class_rows(&mut perf_rows, &base, "statistical_logical_accuracy", &reports, |r| {
            r.statistical_logical_accuracy
        });
        per_class_rows(&mut perf_rows, &base, "mask_fraction", &reports, |r| r.mask_fraction);
        for (series, get) in [
            ("logical_acc_diff", (|r: &MetricsReport| r.logical_acc_diff) as fn(&MetricsReport) -> f64),
            ("statistical_logical_acc_diff", |r| r.statistical_logical_acc_diff),
        ] {
            let values: Vec<f64> = reports.iter().map(|r| get(r)).collect();
            perf_rows.push(FigureRow {
                series: series.to_string(),
                stat: mean_std(&values),
                ..clone_base(&base)
            });
        }

        let defined: Vec<&MetricsReport> =
            reports.iter().copied().filter(|r| r.full_dca.is_some()).collect();
        per_class_rows(&mut full_rows, &base, "sample_weighted", &defined, |r| {
            r.full_dca.as_ref().unwrap().sample_weighted
        });
        let group_values: Vec<f64> =
            defined.iter().map(|r| r.full_dca.as_ref().unwrap().group_weighted).collect();
        full_rows.push(FigureRow {
            series: "group_weighted".to_string(),
            stat: mean_std(&group_values),
            ..clone_base(&base)
        });

        let full_overall: Vec<f64> = defined
            .iter()
            .map(|r| r.full_dca.as_ref().unwrap().sample_weighted.overall)
            .collect();
        summary_rows.push(FigureRow {
            series: "full_dca".to_string(),
            stat: mean_std(&full_overall),
            ..clone_base(&base)
        });
        let minimal: Vec<f64> =
            reports.iter().filter_map(|r| r.minimal_dca.aggregate).collect();
        summary_rows.push(FigureRow {
            series: "minimal_dca".to_string(),
            stat: mean_std(&minimal),
            ..clone_base(&base)
        });
        let gates = reports.iter().map(|r| r.minimal_dca.per_gate.len()).max().unwrap_or(0);
        for g in 0..gates {
            let values: Vec<f64> = reports
                .iter()
                .filter_map(|r| r.minimal_dca.per_gate.get(g).copied().flatten())
                .collect();
            summary_rows.push(FigureRow {
                series: format!("minimal_dca_gate_{g}"),
                stat: mean_std(&values),
                ..clone_base(&base)
            });
        }
    }

    let tables: [(&str, &[FigureRow]); 5] = [
        ("fig3_forest_importance.csv", &forest_rows),
        ("fig4_nib.csv", &nib_rows),
        ("fig5_performance.csv", &perf_rows),
        ("fig6_full_dca.csv", &full_rows),
        ("fig7_dca_summary.csv", &summary_rows),
    ];
    let mut paths = Vec::with_capacity(tables.len());
    for (name, rows) in tables {
        let path = dir.join(name);
        write_figure_csv(&path, rows, &stamp)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Skips `#` comment lines and returns the remaining lines, for tests and
/// external consumers that want the raw table.
pub fn read_table_lines(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.starts_with('#') {
            lines.push(line);
        }
    }
    Ok(lines)
}
