//! Perturbation methods: single-input occlusion with the mask token, and
//! column-permutation importance over an evaluation set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attribution::Target;
use crate::error::Result;
use crate::net::NetModel;
use crate::train::NumericSet;

/// Target-logit drop when one input is replaced with 0.
pub fn occlusion(model: &NetModel, inputs: &[f64], target: u8) -> Result<Vec<f64>> {
    let base = model.logits(inputs)?[target as usize];
    let mut probe = inputs.to_vec();
    let mut scores = Vec::with_capacity(inputs.len());
    for j in 0..inputs.len() {
        let kept = probe[j];
        probe[j] = 0.0;
        scores.push(base - model.logits(&probe)?[target as usize]);
        probe[j] = kept;
    }
    Ok(scores)
}

/// Permutation importance, per sample: for each feature, shuffle that column
/// across the whole set and record each sample's target-logit decrease,
/// averaged over `repeats` permutations. Constant columns shuffle into
/// themselves and score zero.
pub fn feature_permutation(
    model: &NetModel,
    set: &NumericSet,
    target: Target,
    repeats: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = set.len();
    let l = if n == 0 { 0 } else { set.xs[0].len() };
    let mut targets = Vec::with_capacity(n);
    let mut base = Vec::with_capacity(n);
    for (x, &y) in set.xs.iter().zip(&set.ys) {
        let t = match target {
            Target::Predicted => model.predict(x)?,
            Target::Label => y,
        };
        targets.push(t);
        base.push(model.logits(x)?[t as usize]);
    }

    let mut scores = vec![vec![0.0; l]; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut probe = Vec::new();
    for _ in 0..repeats {
        for j in 0..l {
            order.shuffle(&mut rng);
            for (i, &src) in order.iter().enumerate() {
                probe.clear();
                probe.extend_from_slice(&set.xs[i]);
                probe[j] = set.xs[src][j];
                let logit = model.logits(&probe)?[targets[i] as usize];
                scores[i][j] += (base[i] - logit) / repeats as f64;
            }
        }
    }
    Ok(scores)
}
