//! The experiment grid: data preparation, base-model training, attribution,
//! masking, retraining, and metric evaluation. Every stage draws its seed
//! from the master seed and a stable label, so a rerun with the same config
//! reproduces every artifact exactly.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attribution::{attribute_batch, Method, MethodSpec};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::forest::{gini_importances, train_forest, ForestConfig};
use crate::logic::{
    enumerate_dataset, sample_dataset, Dataset, Domain, FormulaSpec, GateKind, Sample,
};
use crate::mask::{apply_mask, compute_mask, masked_numeric, MaskPlan, ThresholdRule};
use crate::metrics::{compute_metrics, MetricsArgs, MetricsReport};
use crate::net::{Activation, NetConfig};
use crate::oracle::{oracle_scores, structural_r_min, ReasoningSets};
use crate::presets::Preset;
use crate::train::{
    fold_partition, oversample_balance, split_dataset, train_fold, train_net, FoldRun,
    NumericSet, SplitMode, TrainConfig,
};

/// Method name reserved for ground-truth scores.
pub const ORACLE_METHOD: &str = "oracle";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetConfig {
    Preset { preset: Preset, top_level: GateKind },
    Explicit { name: String, spec: FormulaSpec, domain: Domain },
}

impl DatasetConfig {
    pub fn name(&self) -> &str {
        match self {
            DatasetConfig::Preset { preset, .. } => preset.name(),
            DatasetConfig::Explicit { name, .. } => name,
        }
    }

    pub fn spec(&self) -> FormulaSpec {
        match self {
            DatasetConfig::Preset { preset, top_level } => preset.spec(*top_level),
            DatasetConfig::Explicit { spec, .. } => spec.clone(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            DatasetConfig::Preset { preset, .. } => preset.domain(),
            DatasetConfig::Explicit { domain, .. } => domain.clone(),
        }
    }

    pub fn top_level(&self) -> GateKind {
        match self {
            DatasetConfig::Preset { top_level, .. } => *top_level,
            DatasetConfig::Explicit { spec, .. } => spec.top_level(),
        }
    }

    /// Stable label used as the seed-derivation prefix for this dataset.
    pub fn label(&self) -> String {
        format!("{}/{}", self.name(), self.top_level())
    }
}

fn default_split() -> SplitMode {
    SplitMode::Split { ratio: 0.9 }
}

fn default_hidden() -> Vec<usize> {
    vec![32]
}

fn default_activation() -> Activation {
    Activation::Tanh
}

fn default_methods() -> Vec<MethodSpec> {
    Method::default_grid().into_iter().map(MethodSpec::new).collect()
}

fn default_forest() -> Option<ForestConfig> {
    Some(ForestConfig::default())
}

fn default_enumeration_budget() -> u64 {
    1 << 20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetConfig>,
    #[serde(default = "default_split")]
    pub split: SplitMode,
    #[serde(default = "default_hidden")]
    pub hidden_layers: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default)]
    pub train: TrainConfig,
    /// Comparison forest trained alongside each kept fold; null disables it.
    #[serde(default = "default_forest")]
    pub forest: Option<ForestConfig>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "ThresholdRule::default_grid")]
    pub thresholds: Vec<ThresholdRule>,
    #[serde(default)]
    pub seed: u64,
    /// Keep only base folds at 100% test accuracy.
    #[serde(default)]
    pub only_100acc: bool,
    /// Add ground-truth scores as an extra method row.
    #[serde(default)]
    pub include_oracle: bool,
    #[serde(default)]
    pub require_unique_rmin: bool,
    #[serde(default = "default_enumeration_budget")]
    pub enumeration_budget: u64,
    /// Evaluate on this many distinct random samples instead of the full
    /// enumeration; needed when the input space is too large to enumerate.
    #[serde(default)]
    pub sample_size: Option<usize>,
}

impl ExperimentConfig {
    pub fn preset_grid(preset: Preset, seed: u64) -> Self {
        ExperimentConfig {
            datasets: [GateKind::And, GateKind::Or, GateKind::Xor]
                .into_iter()
                .map(|top_level| DatasetConfig::Preset { preset, top_level })
                .collect(),
            split: default_split(),
            hidden_layers: default_hidden(),
            activation: default_activation(),
            train: TrainConfig::default(),
            forest: default_forest(),
            methods: default_methods(),
            thresholds: ThresholdRule::default_grid(),
            seed,
            only_100acc: false,
            include_oracle: false,
            require_unique_rmin: false,
            enumeration_budget: default_enumeration_budget(),
            sample_size: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::config("no datasets configured"));
        }
        if self.methods.is_empty() && !self.include_oracle {
            return Err(Error::config("no attribution methods configured"));
        }
        if self.thresholds.is_empty() {
            return Err(Error::config("no thresholds configured"));
        }
        let mut names = BTreeSet::new();
        for spec in &self.methods {
            spec.validate()?;
            let name = spec.method.name();
            if name == ORACLE_METHOD {
                return Err(Error::config("the method name 'oracle' is reserved"));
            }
            if !names.insert(name) {
                return Err(Error::config(format!("duplicate method {name} in the grid")));
            }
        }
        for rule in &self.thresholds {
            rule.validate()?;
        }
        self.train.validate()?;
        if self.sample_size == Some(0) {
            return Err(Error::config("sample_size must be positive"));
        }
        Ok(())
    }

    /// Configured method names, with the reserved ground-truth name appended
    /// when the grid includes it.
    pub fn method_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.methods.iter().map(|m| m.method.name().to_string()).collect();
        if self.include_oracle {
            names.push(ORACLE_METHOD.to_string());
        }
        names
    }
}

/// Hex SHA-256 of the canonical JSON form of the config.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub dataset: String,
    pub top_level: GateKind,
    pub method: String,
    pub threshold: String,
    pub fold: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub key: CellKey,
    pub retrain_epochs: usize,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Ok { cell: CellResult },
    Failed { key: CellKey, error: String },
}

impl CellOutcome {
    pub fn key(&self) -> &CellKey {
        match self {
            CellOutcome::Ok { cell } => &cell.key,
            CellOutcome::Failed { key, .. } => key,
        }
    }

    pub fn cell(&self) -> Option<&CellResult> {
        match self {
            CellOutcome::Ok { cell } => Some(cell),
            CellOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub epochs_run: usize,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    pub used: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestSummary {
    pub fold: usize,
    pub test_accuracy: f64,
    pub importances: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRun {
    pub dataset: String,
    pub top_level: GateKind,
    pub n_samples: usize,
    pub n_train: usize,
    pub n_train_balanced: usize,
    pub n_test: usize,
    pub folds: Vec<FoldSummary>,
    pub forests: Vec<ForestSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config_hash: String,
    pub master_seed: u64,
    pub datasets: Vec<DatasetRun>,
    pub cells: Vec<CellOutcome>,
}

impl RunResult {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.cell().is_none()).count()
    }
}

/// Everything derived once per dataset and shared by its grid cells: the
/// prepared data, the trained base folds, and the ground-truth reasoning.
pub struct PreparedDataset {
    /// Seed-derivation prefix, `name/top`.
    pub label: String,
    pub spec: FormulaSpec,
    pub domain: Domain,
    pub n_train_raw: usize,
    /// Oversampled training samples, originals first.
    pub train_bal: Vec<Sample>,
    pub test: Vec<Sample>,
    pub test_set: NumericSet,
    /// Distinct samples over train and test, in id order.
    pub all_samples: Vec<Sample>,
    pub all_set: NumericSet,
    pub reasoning: BTreeMap<u64, ReasoningSets>,
    pub folds: Vec<FoldRun>,
    /// Which folds pass the accuracy filter.
    pub used: Vec<bool>,
    /// Per-fold validation indices into `train_bal`.
    pub buckets: Vec<Vec<usize>>,
    pub net_cfg: NetConfig,
    pub train_cfg: TrainConfig,
    /// Base-model predictions on the unmasked test set, per fold.
    pub base_test_preds: Vec<Vec<u8>>,
}

/// The exact samples the grid runs on: the full enumeration, or a seeded
/// draw of distinct samples when `sample_size` is set.
pub fn build_dataset(cfg: &ExperimentConfig, ds: &DatasetConfig) -> Result<Dataset> {
    let spec = ds.spec();
    let domain = ds.domain();
    match cfg.sample_size {
        Some(n) => {
            let seed = derive_seed(cfg.seed, &format!("{}/sample", ds.label()));
            sample_dataset(&spec, &domain, n, seed)
        }
        None => enumerate_dataset(&spec, &domain, cfg.enumeration_budget),
    }
}

pub fn prepare_dataset(cfg: &ExperimentConfig, ds: &DatasetConfig) -> Result<PreparedDataset> {
    let label = ds.label();
    let spec = ds.spec();
    let domain = ds.domain();
    let seed = |stage: &str| derive_seed(cfg.seed, &format!("{label}/{stage}"));

    let data = build_dataset(cfg, ds)?;
    let (train_raw, test) = split_dataset(&data.samples, cfg.split, seed("split"))?;
    let train_bal = oversample_balance(&train_raw, seed("oversample"))?;
    let train_set = NumericSet::from_samples(&train_bal);
    let test_set = NumericSet::from_samples(&test);

    let mut by_id: BTreeMap<u64, Sample> = BTreeMap::new();
    for s in train_raw.iter().chain(&test) {
        by_id.entry(s.id).or_insert_with(|| s.clone());
    }
    let all_samples: Vec<Sample> = by_id.into_values().collect();
    let all_set = NumericSet::from_samples(&all_samples);

    let mut reasoning = BTreeMap::new();
    for s in &all_samples {
        reasoning.insert(s.id, structural_r_min(&spec, s, &domain)?);
    }

    let net_cfg = NetConfig::new(spec.len(), &cfg.hidden_layers, cfg.activation, seed("net"));
    let train_cfg = TrainConfig { seed: seed("train"), ..cfg.train.clone() };
    let folds = train_net(&net_cfg, &train_cfg, &train_set, &test_set)?;
    let used: Vec<bool> =
        folds.iter().map(|f| !cfg.only_100acc || f.test_accuracy == 1.0).collect();
    let buckets = fold_partition(&train_cfg, &train_set.ys)?;

    let mut base_test_preds = Vec::with_capacity(folds.len());
    for fold in &folds {
        let preds: Result<Vec<u8>> =
            test_set.xs.iter().map(|x| fold.model.predict(x)).collect();
        base_test_preds.push(preds?);
    }

    Ok(PreparedDataset {
        label,
        spec,
        domain,
        n_train_raw: train_raw.len(),
        train_bal,
        test,
        test_set,
        all_samples,
        all_set,
        reasoning,
        folds,
        used,
        buckets,
        net_cfg,
        train_cfg,
        base_test_preds,
    })
}

pub fn dataset_summary(ds: &DatasetConfig, ctx: &PreparedDataset, forests: &[ForestSummary]) -> DatasetRun {
    DatasetRun {
        dataset: ds.name().to_string(),
        top_level: ds.top_level(),
        n_samples: ctx.all_samples.len(),
        n_train: ctx.n_train_raw,
        n_train_balanced: ctx.train_bal.len(),
        n_test: ctx.test.len(),
        folds: ctx
            .folds
            .iter()
            .zip(&ctx.used)
            .map(|(f, &used)| FoldSummary {
                fold: f.fold,
                epochs_run: f.epochs_run,
                train_accuracy: f.train_accuracy,
                val_accuracy: f.val_accuracy,
                test_accuracy: f.test_accuracy,
                used,
            })
            .collect(),
        forests: forests.to_vec(),
    }
}

pub fn train_forests(cfg: &ExperimentConfig, ctx: &PreparedDataset) -> Result<Vec<ForestSummary>> {
    let Some(forest_cfg) = &cfg.forest else {
        return Ok(Vec::new());
    };
    let train_set = NumericSet::from_samples(&ctx.train_bal);
    let mut summaries = Vec::new();
    for fold in ctx.folds.iter().zip(&ctx.used).filter(|(_, &u)| u).map(|(f, _)| f) {
        let per_fold = ForestConfig {
            seed: derive_seed(cfg.seed, &format!("{}/forest/fold{}", ctx.label, fold.fold)),
            ..forest_cfg.clone()
        };
        let model = train_forest(&per_fold, &train_set)?;
        summaries.push(ForestSummary {
            fold: fold.fold,
            test_accuracy: model.accuracy(&ctx.test_set)?,
            importances: gini_importances(&model).to_vec(),
        });
    }
    Ok(summaries)
}

/// Attribution scores per sample id.
pub type ScoreTable = BTreeMap<u64, Vec<f64>>;

/// Scores for one fold's base model over all distinct samples; the reserved
/// name draws ground-truth scores instead of running a method.
pub fn compute_scores(
    cfg: &ExperimentConfig,
    ctx: &PreparedDataset,
    fold: usize,
    method: &str,
) -> Result<ScoreTable> {
    if method == ORACLE_METHOD {
        return Ok(ctx
            .all_samples
            .iter()
            .map(|s| (s.id, oracle_scores(&ctx.spec, &ctx.reasoning[&s.id])))
            .collect());
    }
    let spec = cfg
        .methods
        .iter()
        .find(|m| m.method.name() == method)
        .ok_or_else(|| Error::config(format!("unknown method {method}")))?;
    let seeded = MethodSpec {
        seed: derive_seed(cfg.seed, &format!("{}/attr/{method}/fold{fold}", ctx.label)),
        ..spec.clone()
    };
    let rows = attribute_batch(&ctx.folds[fold].model, &ctx.all_set, &seeded)?;
    Ok(ctx.all_set.ids.iter().copied().zip(rows).collect())
}

pub fn run_cell(
    cfg: &ExperimentConfig,
    ctx: &PreparedDataset,
    scores: &ScoreTable,
    key: &CellKey,
    rule: ThresholdRule,
) -> Result<CellResult> {
    let fold = key.fold;
    let mut plans: BTreeMap<u64, MaskPlan> = BTreeMap::new();
    for s in &ctx.all_samples {
        plans.insert(s.id, compute_mask(&scores[&s.id], rule, &ctx.spec)?);
    }

    let mut masked_train = NumericSet::default();
    for s in &ctx.train_bal {
        masked_train.push(s.id, masked_numeric(&s.inputs, &plans[&s.id].mask), s.label);
    }
    let mut masked_test_set = NumericSet::default();
    let mut masked_test = Vec::with_capacity(ctx.test.len());
    for s in &ctx.test {
        let plan = &plans[&s.id];
        masked_test.push(apply_mask(s, plan)?);
        masked_test_set.push(s.id, masked_numeric(&s.inputs, &plan.mask), s.label);
    }

    let bucket = &ctx.buckets[fold];
    let in_val: BTreeSet<usize> = bucket.iter().copied().collect();
    let train_idx: Vec<usize> =
        (0..masked_train.len()).filter(|i| !in_val.contains(i)).collect();
    let retrain_net = NetConfig {
        seed: derive_seed(
            cfg.seed,
            &format!("{}/retrain/{}/{}", ctx.label, key.method, key.threshold),
        ),
        ..ctx.net_cfg.clone()
    };
    let run = train_fold(
        &retrain_net,
        &ctx.train_cfg,
        fold,
        &masked_train.subset(&train_idx),
        &masked_train.subset(bucket),
        &masked_test_set,
    )?;

    let retrained_preds: Vec<u8> = masked_test_set
        .xs
        .iter()
        .map(|x| run.model.predict(x))
        .collect::<Result<_>>()?;
    let test_scores: Vec<Vec<f64>> = ctx.test.iter().map(|s| scores[&s.id].clone()).collect();
    let metrics = compute_metrics(&MetricsArgs {
        spec: &ctx.spec,
        domain: &ctx.domain,
        samples: &ctx.test,
        masked: &masked_test,
        scores: &test_scores,
        reasoning: &ctx.reasoning,
        base_preds: &ctx.base_test_preds[fold],
        retrained_preds: &retrained_preds,
        require_unique_rmin: cfg.require_unique_rmin,
    })?;

    Ok(CellResult { key: key.clone(), retrain_epochs: run.epochs_run, metrics })
}

fn dataset_cells(cfg: &ExperimentConfig, ds: &DatasetConfig, ctx: &PreparedDataset) -> Vec<CellOutcome> {
    let methods = cfg.method_names();
    let pairs: Vec<(usize, String)> = methods
        .iter()
        .flat_map(|m| (0..ctx.folds.len()).map(move |f| (f, m.clone())))
        .filter(|(f, _)| ctx.used[*f])
        .collect();
    let tables: BTreeMap<(usize, String), Result<ScoreTable>> = pairs
        .par_iter()
        .map(|(f, m)| ((*f, m.clone()), compute_scores(cfg, ctx, *f, m)))
        .collect();

    let mut keys = Vec::new();
    for method in &methods {
        for rule in &cfg.thresholds {
            for fold in 0..ctx.folds.len() {
                keys.push((
                    CellKey {
                        dataset: ds.name().to_string(),
                        top_level: ds.top_level(),
                        method: method.clone(),
                        threshold: rule.label(),
                        fold,
                    },
                    *rule,
                ));
            }
        }
    }
    keys.par_iter()
        .map(|(key, rule)| {
            if !ctx.used[key.fold] {
                return CellOutcome::Failed {
                    key: key.clone(),
                    error: "base fold below 100% test accuracy".to_string(),
                };
            }
            match &tables[&(key.fold, key.method.clone())] {
                Err(e) => CellOutcome::Failed { key: key.clone(), error: e.to_string() },
                Ok(scores) => match run_cell(cfg, ctx, scores, key, *rule) {
                    Ok(cell) => CellOutcome::Ok { cell },
                    Err(e) => CellOutcome::Failed { key: key.clone(), error: e.to_string() },
                },
            }
        })
        .collect()
}

/// All cell keys a config spans, in emission order.
fn grid_keys(cfg: &ExperimentConfig, ds: &DatasetConfig) -> Vec<CellKey> {
    let mut keys = Vec::new();
    for method in cfg.method_names() {
        for rule in &cfg.thresholds {
            for fold in 0..cfg.train.folds {
                keys.push(CellKey {
                    dataset: ds.name().to_string(),
                    top_level: ds.top_level(),
                    method: method.clone(),
                    threshold: rule.label(),
                    fold,
                });
            }
        }
    }
    keys
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let hash = config_hash(cfg)?;
    let mut datasets = Vec::new();
    let mut cells = Vec::new();
    for ds in &cfg.datasets {
        match prepare_dataset(cfg, ds) {
            Ok(ctx) => {
                let forests = match train_forests(cfg, &ctx) {
                    Ok(f) => f,
                    Err(e) => {
                        // the comparison model must not take the grid down
                        eprintln!("forest training failed for {}: {e}", ctx.label);
                        Vec::new()
                    }
                };
                datasets.push(dataset_summary(ds, &ctx, &forests));
                cells.extend(dataset_cells(cfg, ds, &ctx));
            }
            Err(e) => {
                datasets.push(DatasetRun {
                    dataset: ds.name().to_string(),
                    top_level: ds.top_level(),
                    n_samples: 0,
                    n_train: 0,
                    n_train_balanced: 0,
                    n_test: 0,
                    folds: Vec::new(),
                    forests: Vec::new(),
                });
                let msg = e.to_string();
                cells.extend(grid_keys(cfg, ds).into_iter().map(|key| CellOutcome::Failed {
                    key,
                    error: msg.clone(),
                }));
            }
        }
    }
    Ok(RunResult { config_hash: hash, master_seed: cfg.seed, datasets, cells })
}

/// Fresh-initialized model of the base architecture, trained on the masked
/// fold data and evaluated on the masked test set.
pub fn roar_retrain(
    net_cfg: &NetConfig,
    train_cfg: &TrainConfig,
    fold: usize,
    masked_train: &NumericSet,
    masked_test: &NumericSet,
) -> Result<FoldRun> {
    let buckets = fold_partition(train_cfg, &masked_train.ys)?;
    let bucket = buckets.get(fold).ok_or_else(|| {
        Error::config(format!("fold {fold} out of range for {} folds", buckets.len()))
    })?;
    let in_val: BTreeSet<usize> = bucket.iter().copied().collect();
    let train_idx: Vec<usize> =
        (0..masked_train.len()).filter(|i| !in_val.contains(i)).collect();
    train_fold(
        net_cfg,
        train_cfg,
        fold,
        &masked_train.subset(&train_idx),
        &masked_train.subset(bucket),
        masked_test,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig::preset_grid(Preset::TwoInBinary, 7)
    }

    #[test]
    fn preset_grid_spans_the_paper_shape() {
        let cfg = base_config();
        assert_eq!(cfg.datasets.len(), 3);
        assert_eq!(cfg.methods.len(), 8);
        assert_eq!(cfg.thresholds.len(), 4);
        assert_eq!(cfg.train.folds, 5);
        cfg.validate().unwrap();
        let keys: usize = cfg.datasets.iter().map(|ds| grid_keys(&cfg, ds).len()).sum();
        assert_eq!(keys, 480);
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let cfg = base_config();
        assert_eq!(config_hash(&cfg).unwrap(), config_hash(&cfg).unwrap());
        let reparsed: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(config_hash(&reparsed).unwrap(), config_hash(&cfg).unwrap());
        let mut other = cfg;
        other.seed = 8;
        assert_ne!(config_hash(&other).unwrap(), config_hash(&reparsed).unwrap());
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let mut cfg = base_config();
        cfg.datasets.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = base_config();
        cfg.methods.push(cfg.methods[0].clone());
        assert!(cfg.validate().is_err(), "duplicate method names are ambiguous");

        let mut cfg = base_config();
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
        cfg.include_oracle = true;
        cfg.validate().unwrap();

        let mut cfg = base_config();
        cfg.thresholds.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = base_config();
        cfg.sample_size = Some(0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dataset_config_exposes_the_preset() {
        let ds = DatasetConfig::Preset { preset: Preset::ThreeInBinary, top_level: GateKind::Or };
        assert_eq!(ds.name(), "3inBinary");
        assert_eq!(ds.top_level(), GateKind::Or);
        assert_eq!(ds.spec().len(), 12);
        assert_eq!(ds.label(), "3inBinary/or");
    }
}
