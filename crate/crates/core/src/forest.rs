//! Bagged CART forest used as the comparison learner. Trees split on Gini
//! impurity over a random feature subset per node; feature importances are
//! mean decrease in impurity, normalized per tree and averaged.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::train::NumericSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features considered per split; `None` means ceil(sqrt(l)).
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        // bootstrap off: on exhaustively enumerated data every tree then sees
        // the exact input distribution and baseline features get importance 0
        // instead of resampling noise
        ForestConfig { n_trees: 100, max_depth: 16, features_per_split: None, bootstrap: false, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Node {
    Leaf { class: u8 },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

impl Node {
    fn predict(&self, x: &[f64]) -> u8 {
        match self {
            Node::Leaf { class } => *class,
            Node::Split { feature, threshold, left, right } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<Node>,
    n_features: usize,
    /// Mean over trees of each tree's normalized impurity decrease.
    importances: Vec<f64>,
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        if x.len() != self.n_features {
            return Err(Error::input(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let ones = self.trees.iter().filter(|t| t.predict(x) == 1).count();
        Ok(u8::from(2 * ones > self.trees.len()))
    }

    pub fn accuracy(&self, set: &NumericSet) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::input("accuracy over an empty set"));
        }
        let mut correct = 0;
        for (x, &y) in set.xs.iter().zip(&set.ys) {
            if self.predict(x)? == y {
                correct += 1;
            }
        }
        Ok(correct as f64 / set.len() as f64)
    }
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

fn label_counts(set: &NumericSet, rows: &[usize]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &r in rows {
        counts[set.ys[r] as usize] += 1;
    }
    counts
}

fn majority(counts: [usize; 2]) -> u8 {
    u8::from(counts[1] > counts[0])
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    decrease: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

/// Best split of `rows` on one feature, or None when the feature is constant
/// there. Zero-decrease splits are allowed; purity does the stopping.
fn best_split_on(
    set: &NumericSet,
    rows: &[usize],
    feature: usize,
    parent_gini: f64,
    total_rows: usize,
) -> Option<SplitChoice> {
    let mut values: Vec<f64> = rows.iter().map(|&r| set.xs[r][feature]).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    if values.len() < 2 {
        return None;
    }
    let n = rows.len() as f64;
    let mut best: Option<SplitChoice> = None;
    for pair in values.windows(2) {
        let threshold = 0.5 * (pair[0] + pair[1]);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &r in rows {
            if set.xs[r][feature] <= threshold {
                left.push(r);
            } else {
                right.push(r);
            }
        }
        let gl = gini(label_counts(set, &left));
        let gr = gini(label_counts(set, &right));
        let weighted = (left.len() as f64 * gl + right.len() as f64 * gr) / n;
        let decrease = (n / total_rows as f64) * (parent_gini - weighted);
        if best.as_ref().map_or(true, |b| decrease > b.decrease) {
            best = Some(SplitChoice { feature, threshold, decrease, left, right });
        }
    }
    best
}

fn grow(
    set: &NumericSet,
    rows: Vec<usize>,
    depth: usize,
    cfg: &ForestConfig,
    k_features: usize,
    total_rows: usize,
    rng: &mut ChaCha8Rng,
    importances: &mut [f64],
) -> Node {
    let counts = label_counts(set, &rows);
    if depth >= cfg.max_depth || rows.len() < 2 || counts[0] == 0 || counts[1] == 0 {
        return Node::Leaf { class: majority(counts) };
    }
    let parent_gini = gini(counts);
    let mut order: Vec<usize> = (0..set.xs[0].len()).collect();
    order.shuffle(rng);
    // examine features in random order until k of them were splittable here,
    // running past k while nothing valid has turned up
    let mut best: Option<SplitChoice> = None;
    let mut usable = 0;
    for &f in &order {
        if usable >= k_features {
            break;
        }
        if let Some(split) = best_split_on(set, &rows, f, parent_gini, total_rows) {
            usable += 1;
            if best.as_ref().map_or(true, |b| split.decrease > b.decrease) {
                best = Some(split);
            }
        }
    }
    match best {
        None => Node::Leaf { class: majority(counts) },
        Some(split) => {
            importances[split.feature] += split.decrease;
            let left = grow(set, split.left, depth + 1, cfg, k_features, total_rows, rng, importances);
            let right = grow(set, split.right, depth + 1, cfg, k_features, total_rows, rng, importances);
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}

pub fn train_forest(cfg: &ForestConfig, train: &NumericSet) -> Result<ForestModel> {
    if train.is_empty() {
        return Err(Error::input("empty training set"));
    }
    if cfg.n_trees == 0 || cfg.max_depth == 0 {
        return Err(Error::config("forest needs at least one tree and depth one"));
    }
    let n_features = train.xs[0].len();
    let k_features = match cfg.features_per_split {
        Some(k) if k == 0 || k > n_features => {
            return Err(Error::config(format!(
                "features_per_split must lie in 1..={n_features}"
            )))
        }
        Some(k) => k,
        None => (n_features as f64).sqrt().ceil() as usize,
    };

    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut importance_sum = vec![0.0; n_features];
    let mut contributing_trees = 0usize;
    for t in 0..cfg.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("tree{t}")));
        let rows: Vec<usize> = if cfg.bootstrap {
            (0..train.len()).map(|_| rng.gen_range(0..train.len())).collect()
        } else {
            (0..train.len()).collect()
        };
        let total = rows.len();
        let mut tree_importance = vec![0.0; n_features];
        let tree = grow(train, rows, 0, cfg, k_features, total, &mut rng, &mut tree_importance);
        let total_decrease: f64 = tree_importance.iter().sum();
        if total_decrease > 0.0 {
            contributing_trees += 1;
            for (acc, imp) in importance_sum.iter_mut().zip(&tree_importance) {
                *acc += imp / total_decrease;
            }
        }
        trees.push(tree);
    }

    let importances = if contributing_trees == 0 {
        importance_sum
    } else {
        importance_sum.iter().map(|s| s / contributing_trees as f64).collect()
    };
    Ok(ForestModel { trees, n_features, importances })
}

/// Per-feature mean decrease in Gini impurity; sums to 1 whenever any tree
/// found a split.
pub fn gini_importances(model: &ForestModel) -> &[f64] {
    &model.importances
}
