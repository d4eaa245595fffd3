//! Dataset splitting, class balancing, and the k-fold training loop for the
//! network models. Training is softmax cross-entropy with SGD or Adam and an
//! early stop once the fold's train and validation accuracies both hit 1.0.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::logic::Sample;
use crate::net::{NetConfig, NetModel};

/// Numeric view of a sample set: what the models actually consume.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumericSet {
    pub ids: Vec<u64>,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<u8>,
}

impl NumericSet {
    pub fn from_samples(samples: &[Sample]) -> Self {
        let mut set = NumericSet::default();
        for s in samples {
            set.ids.push(s.id);
            set.xs.push(s.inputs.iter().map(|v| v.to_f64()).collect());
            set.ys.push(s.label);
        }
        set
    }

    pub fn push(&mut self, id: u64, x: Vec<f64>, y: u8) {
        self.ids.push(id);
        self.xs.push(x);
        self.ys.push(y);
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut out = NumericSet::default();
        for &i in indices {
            out.push(self.ids[i], self.xs[i].clone(), self.ys[i]);
        }
        out
    }
}

fn class_indices(labels: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let mut zeros = Vec::new();
    let mut ones = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y == 0 {
            zeros.push(i);
        } else {
            ones.push(i);
        }
    }
    (zeros, ones)
}

/// Index multiset that balances the classes: every original index once, then
/// uniformly resampled minority indices appended until the counts match.
fn oversample_indices(labels: &[u8], seed: u64) -> Result<Vec<usize>> {
    let (zeros, ones) = class_indices(labels);
    if zeros.is_empty() || ones.is_empty() {
        return Err(Error::input("cannot balance a single-class sample set"));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let (minority, deficit) = if zeros.len() < ones.len() {
        (zeros.clone(), ones.len() - zeros.len())
    } else {
        (ones.clone(), zeros.len() - ones.len())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..deficit {
        order.push(*minority.choose(&mut rng).unwrap());
    }
    Ok(order)
}

/// Duplicates minority-class samples until both classes are equally frequent.
/// All original samples are retained; duplicates are appended.
pub fn oversample_balance(samples: &[Sample], seed: u64) -> Result<Vec<Sample>> {
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let order = oversample_indices(&labels, seed)?;
    Ok(order.into_iter().map(|i| samples[i].clone()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    /// Stratified train/test split with the given train fraction.
    Split { ratio: f64 },
    /// Train and test are both the full sample set.
    NotSplit,
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Stratified split into (train, test), both returned in id order. With
/// `NotSplit` both sides are the whole set.
pub fn split_dataset(samples: &[Sample], mode: SplitMode, seed: u64) -> Result<(Vec<Sample>, Vec<Sample>)> {
    match mode {
        SplitMode::NotSplit => Ok((samples.to_vec(), samples.to_vec())),
        SplitMode::Split { ratio } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::config(format!("split ratio {ratio} must lie strictly in (0, 1)")));
            }
            let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
            let (zeros, ones) = class_indices(&labels);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut train_idx = Vec::new();
            let mut test_idx = Vec::new();
            for class in [zeros, ones] {
                if class.is_empty() {
                    continue;
                }
                let mut pool = class;
                pool.shuffle(&mut rng);
                let mut take = round_half_up(ratio * pool.len() as f64);
                if pool.len() >= 2 {
                    take = take.clamp(1, pool.len() - 1);
                } else {
                    take = 1;
                }
                train_idx.extend_from_slice(&pool[..take]);
                test_idx.extend_from_slice(&pool[take..]);
            }
            train_idx.sort_unstable();
            test_idx.sort_unstable();
            let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
            Ok((pick(&train_idx), pick(&test_idx)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop as soon as fold-train and validation accuracy are both 1.0.
    pub early_stop: bool,
    pub folds: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: Optimizer::default(),
            learning_rate: 0.01,
            batch_size: 32,
            max_epochs: 2000,
            early_stop: true,
            folds: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max epochs must be at least 1"));
        }
        if self.folds < 2 {
            return Err(Error::config("need at least two folds"));
        }
        if let Optimizer::Adam { beta1, beta2, epsilon } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || epsilon <= 0.0 {
                return Err(Error::config("adam parameters out of range"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FoldRun {
    pub fold: usize,
    pub model: NetModel,
    pub epochs_run: usize,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    pub history: Vec<EpochLog>,
}

pub fn accuracy(model: &NetModel, set: &NumericSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::input("accuracy over an empty set"));
    }
    let mut correct = 0usize;
    for (x, &y) in set.xs.iter().zip(&set.ys) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / set.len() as f64)
}

fn softmax2(z0: f64, z1: f64) -> (f64, f64) {
    let m = z0.max(z1);
    let e0 = (z0 - m).exp();
    let e1 = (z1 - m).exp();
    let sum = e0 + e1;
    (e0 / sum, e1 / sum)
}

/// Per-layer gradient accumulators plus Adam moment state.
struct ParamState {
    grads: Vec<(Vec<f64>, Vec<f64>)>,
    m: Vec<(Vec<f64>, Vec<f64>)>,
    v: Vec<(Vec<f64>, Vec<f64>)>,
    step: u64,
}

impl ParamState {
    fn new(model: &NetModel) -> Self {
        let shape = |layer: &crate::net::Layer| (vec![0.0; layer.weights.len()], vec![0.0; layer.biases.len()]);
        ParamState {
            grads: model.layers.iter().map(shape).collect(),
            m: model.layers.iter().map(shape).collect(),
            v: model.layers.iter().map(shape).collect(),
            step: 0,
        }
    }

    fn zero_grads(&mut self) {
        for (w, b) in self.grads.iter_mut() {
            w.fill(0.0);
            b.fill(0.0);
        }
    }
}

/// Backprop for one sample; accumulates parameter gradients and returns
/// the cross-entropy loss.
fn accumulate_gradients(model: &NetModel, state: &mut ParamState, x: &[f64], y: u8) -> f64 {
    let trace = model.forward_trace(x);
    let logits = trace.pre_activations.last().unwrap();
    let (p0, p1) = softmax2(logits[0], logits[1]);
    let loss = -(if y == 0 { p0 } else { p1 }).max(f64::MIN_POSITIVE).ln();

    // dL/dlogits = p - onehot(y)
    let mut delta = vec![p0, p1];
    delta[y as usize] -= 1.0;

    for k in (0..model.layers.len()).rev() {
        let layer = &model.layers[k];
        let (gw, gb) = &mut state.grads[k];
        let a_prev = &trace.activations[k];
        for o in 0..layer.out_dim {
            gb[o] += delta[o];
            let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (g, &a) in row.iter_mut().zip(a_prev) {
                *g += delta[o] * a;
            }
        }
        if k > 0 {
            let mut prev = Vec::new();
            layer.backward_input(&delta, &mut prev);
            delta = prev
                .iter()
                .zip(&trace.pre_activations[k - 1])
                .map(|(&d, &z)| d * model.activation.derivative(z))
                .collect();
        }
    }
    loss
}

fn apply_update(model: &mut NetModel, state: &mut ParamState, cfg: &TrainConfig, batch_len: usize) {
    let scale = 1.0 / batch_len as f64;
    state.step += 1;
    match cfg.optimizer {
        Optimizer::Sgd => {
            for (layer, (gw, gb)) in model.layers.iter_mut().zip(&state.grads) {
                for (w, g) in layer.weights.iter_mut().zip(gw) {
                    *w -= cfg.learning_rate * g * scale;
                }
                for (b, g) in layer.biases.iter_mut().zip(gb) {
                    *b -= cfg.learning_rate * g * scale;
                }
            }
        }
        Optimizer::Adam { beta1, beta2, epsilon } => {
            let bc1 = 1.0 - beta1.powi(state.step as i32);
            let bc2 = 1.0 - beta2.powi(state.step as i32);
            for (k, layer) in model.layers.iter_mut().enumerate() {
                let (gw, gb) = &state.grads[k];
                let (mw, mb) = &mut state.m[k];
                let (vw, vb) = &mut state.v[k];
                let update = |param: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                    let g = g * scale;
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *param -= cfg.learning_rate * m_hat / (v_hat.sqrt() + epsilon);
                };
                for ((w, &g), (m, v)) in layer
                    .weights
                    .iter_mut()
                    .zip(gw)
                    .zip(mw.iter_mut().zip(vw.iter_mut()))
                {
                    update(w, g, m, v);
                }
                for ((b, &g), (m, v)) in layer
                    .biases
                    .iter_mut()
                    .zip(gb)
                    .zip(mb.iter_mut().zip(vb.iter_mut()))
                {
                    update(b, g, m, v);
                }
            }
        }
    }
}

/// Stratified fold assignment: returns `folds` index lists covering 0..n.
fn fold_assignment(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if labels.len() < folds {
        return Err(Error::config(format!(
            "cannot carve {folds} folds out of {} samples",
            labels.len()
        )));
    }
    let (zeros, ones) = class_indices(labels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buckets = vec![Vec::new(); folds];
    for class in [zeros, ones] {
        let mut pool = class;
        pool.shuffle(&mut rng);
        for (i, idx) in pool.into_iter().enumerate() {
            buckets[i % folds].push(idx);
        }
    }
    for bucket in buckets.iter_mut() {
        bucket.sort_unstable();
    }
    if buckets.iter().any(|b| b.is_empty()) {
        return Err(Error::config("a fold came out empty; reduce the fold count"));
    }
    Ok(buckets)
}

/// Trains one fresh model on an explicit fold partition. The fold index only
/// picks the derived init and shuffle seeds, so callers can rebuild a
/// specific fold of a `train_net` run on different (say, masked) data.
pub fn train_fold(
    net_cfg: &NetConfig,
    cfg: &TrainConfig,
    fold: usize,
    fold_train: &NumericSet,
    fold_val: &NumericSet,
    test: &NumericSet,
) -> Result<FoldRun> {
    let init_cfg = NetConfig {
        seed: derive_seed(net_cfg.seed, &format!("init-fold{fold}")),
        ..net_cfg.clone()
    };
    let mut model = NetModel::init(&init_cfg)?;
    let mut state = ParamState::new(&model);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("shuffle-fold{fold}")));
    let mut order: Vec<usize> = (0..fold_train.len()).collect();
    let mut history = Vec::new();
    let mut epochs_run = 0;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            state.zero_grads();
            for &i in batch {
                loss_sum += accumulate_gradients(&model, &mut state, &fold_train.xs[i], fold_train.ys[i]);
            }
            apply_update(&mut model, &mut state, cfg, batch.len());
        }
        let mean_loss = loss_sum / fold_train.len() as f64;
        if !mean_loss.is_finite() || !model.all_finite() {
            return Err(Error::training(format!(
                "fold {fold} diverged at epoch {epoch}: loss {mean_loss}"
            )));
        }
        let train_acc = accuracy(&model, fold_train)?;
        let val_acc = accuracy(&model, fold_val)?;
        history.push(EpochLog { epoch, mean_loss, train_accuracy: train_acc, val_accuracy: val_acc });
        epochs_run = epoch + 1;
        if cfg.early_stop && train_acc == 1.0 && val_acc == 1.0 {
            break;
        }
    }

    let test_accuracy = accuracy(&model, test)?;
    let last = history.last().unwrap();
    Ok(FoldRun {
        fold,
        model,
        epochs_run,
        train_accuracy: last.train_accuracy,
        val_accuracy: last.val_accuracy,
        test_accuracy,
        history,
    })
}

/// The stratified validation buckets a `train_net` call with this config
/// would use, one sorted index list per fold.
pub fn fold_partition(cfg: &TrainConfig, labels: &[u8]) -> Result<Vec<Vec<usize>>> {
    fold_assignment(labels, cfg.folds, derive_seed(cfg.seed, "folds"))
}

/// Trains one fresh network per fold on the provided training set and
/// reports accuracies against the fold's held-out portion and the test set.
pub fn train_net(
    net_cfg: &NetConfig,
    cfg: &TrainConfig,
    train: &NumericSet,
    test: &NumericSet,
) -> Result<Vec<FoldRun>> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::input("empty training set"));
    }
    net_cfg.validate(train.xs[0].len())?;
    let buckets = fold_partition(cfg, &train.ys)?;
    let mut runs = Vec::with_capacity(cfg.folds);
    for (fold, bucket) in buckets.iter().enumerate() {
        let in_val: std::collections::BTreeSet<usize> = bucket.iter().copied().collect();
        let train_idx: Vec<usize> = (0..train.len()).filter(|i| !in_val.contains(i)).collect();
        let fold_train = train.subset(&train_idx);
        let fold_val = train.subset(bucket);
        runs.push(train_fold(net_cfg, cfg, fold, &fold_train, &fold_val, test)?);
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{enumerate_dataset, Dataset, GateKind};
    use crate::net::Activation;
    use crate::presets::Preset;

    fn full_two_in(top: GateKind) -> Dataset {
        let preset = Preset::TwoInBinary;
        enumerate_dataset(&preset.spec(top), &preset.domain(), 1 << 16).unwrap()
    }

    fn counts(samples: &[Sample]) -> (usize, usize) {
        let ones = samples.iter().filter(|s| s.label == 1).count();
        (samples.len() - ones, ones)
    }

    #[test]
    fn oversample_balances_and_keeps_originals() {
        let data = full_two_in(GateKind::And);
        assert_eq!(counts(&data.samples), (232, 24));
        let balanced = oversample_balance(&data.samples, 7).unwrap();
        assert_eq!(counts(&balanced), (232, 232));
        assert_eq!(&balanced[..256], &data.samples[..], "originals retained in order");
        let minority: std::collections::BTreeSet<u64> =
            data.samples.iter().filter(|s| s.label == 1).map(|s| s.id).collect();
        assert!(balanced[256..].iter().all(|s| minority.contains(&s.id)));
        assert_eq!(oversample_balance(&data.samples, 7).unwrap(), balanced);
    }

    #[test]
    fn oversample_rejects_single_class() {
        let data = full_two_in(GateKind::And);
        let ones: Vec<Sample> = data.samples.iter().filter(|s| s.label == 1).cloned().collect();
        assert!(oversample_balance(&ones, 0).is_err());
    }

    #[test]
    fn split_is_stratified_and_partitions() {
        let data = full_two_in(GateKind::And);
        let (train, test) = split_dataset(&data.samples, SplitMode::Split { ratio: 0.9 }, 11).unwrap();
        assert_eq!(train.len() + test.len(), 256);
        assert_eq!(test.len(), 25);
        assert_eq!(counts(&train), (209, 22));
        assert_eq!(counts(&test), (23, 2));
        let train_ids: std::collections::BTreeSet<u64> = train.iter().map(|s| s.id).collect();
        assert!(test.iter().all(|s| !train_ids.contains(&s.id)), "split sides are disjoint");
        let (t2, _) = split_dataset(&data.samples, SplitMode::Split { ratio: 0.9 }, 11).unwrap();
        assert_eq!(train, t2);
        let (t3, _) = split_dataset(&data.samples, SplitMode::Split { ratio: 0.9 }, 12).unwrap();
        assert_ne!(train, t3, "different seed picks a different split");
    }

    #[test]
    fn not_split_uses_everything_twice() {
        let data = full_two_in(GateKind::Or);
        let (train, test) = split_dataset(&data.samples, SplitMode::NotSplit, 0).unwrap();
        assert_eq!(train, data.samples);
        assert_eq!(test, data.samples);
    }

    #[test]
    fn split_rejects_degenerate_ratio() {
        let data = full_two_in(GateKind::And);
        assert!(split_dataset(&data.samples, SplitMode::Split { ratio: 0.0 }, 0).is_err());
        assert!(split_dataset(&data.samples, SplitMode::Split { ratio: 1.0 }, 0).is_err());
    }

    #[test]
    fn fold_assignment_is_a_stratified_partition() {
        let data = full_two_in(GateKind::And);
        let labels: Vec<u8> = data.samples.iter().map(|s| s.label).collect();
        let buckets = fold_assignment(&labels, 5, 3).unwrap();
        let mut seen = vec![false; labels.len()];
        for bucket in &buckets {
            for &i in bucket {
                assert!(!seen[i]);
                seen[i] = true;
            }
            let ones = bucket.iter().filter(|&&i| labels[i] == 1).count();
            assert!((4..=5).contains(&ones), "each fold holds 4 or 5 of the 24 positives");
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn training_reaches_perfect_accuracy_on_the_full_enumeration() {
        let data = full_two_in(GateKind::Or);
        let balanced = oversample_balance(&data.samples, 1).unwrap();
        let train = NumericSet::from_samples(&balanced);
        let test = NumericSet::from_samples(&data.samples);
        let net = NetConfig::new(8, &[32], Activation::Tanh, 5);
        let cfg = TrainConfig { seed: 9, ..TrainConfig::default() };
        let runs = train_net(&net, &cfg, &train, &test).unwrap();
        assert_eq!(runs.len(), 5);
        for run in &runs {
            assert_eq!(run.train_accuracy, 1.0, "fold {} train", run.fold);
        }
        let perfect = runs
            .iter()
            .filter(|r| r.val_accuracy == 1.0 && r.test_accuracy == 1.0)
            .count();
        assert!(perfect >= 1, "no fold generalized perfectly");
        for run in runs.iter().filter(|r| r.val_accuracy == 1.0) {
            assert!(run.epochs_run < cfg.max_epochs, "early stop fired for fold {}", run.fold);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = full_two_in(GateKind::And);
        let train = NumericSet::from_samples(&data.samples);
        let net = NetConfig::new(8, &[8], Activation::Tanh, 2);
        let cfg = TrainConfig { folds: 2, max_epochs: 5, early_stop: false, seed: 42, ..TrainConfig::default() };
        let a = train_net(&net, &cfg, &train, &train).unwrap();
        let b = train_net(&net, &cfg, &train, &train).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.model, rb.model, "identical seeds give identical weights");
            assert_eq!(ra.history.len(), rb.history.len());
        }
    }

    #[test]
    fn sgd_loss_decreases_on_average() {
        let data = full_two_in(GateKind::Xor);
        let train = NumericSet::from_samples(&data.samples);
        let net = NetConfig::new(8, &[12], Activation::Tanh, 3);
        let cfg = TrainConfig {
            optimizer: Optimizer::Sgd,
            learning_rate: 0.05,
            batch_size: 256,
            max_epochs: 60,
            early_stop: false,
            folds: 2,
            seed: 4,
        };
        let runs = train_net(&net, &cfg, &train, &train).unwrap();
        for run in &runs {
            let first = run.history.first().unwrap().mean_loss;
            let last = run.history.last().unwrap().mean_loss;
            assert!(last < first, "fold {}: {first} -> {last}", run.fold);
        }
    }

    #[test]
    fn config_validation_catches_bad_settings() {
        assert!(TrainConfig { folds: 1, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig {
            optimizer: Optimizer::Adam { beta1: 1.5, beta2: 0.999, epsilon: 1e-8 },
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
    }
}
