//! Shapley-value attribution with the mask-token-0 value function
//! v(S) = target logit with every input outside S zeroed. Exact mode solves
//! the Shapley-kernel weighted least squares over all proper coalitions,
//! which reproduces the definitional Shapley values; a definitional
//! enumeration oracle is included for verification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::NetModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ShapMode {
    Exact,
    Sampled { n: usize },
}

fn coalition_value(model: &NetModel, inputs: &[f64], target: u8, bits: u64) -> Result<f64> {
    let probe: Vec<f64> = inputs
        .iter()
        .enumerate()
        .map(|(j, &x)| if bits >> j & 1 == 1 { x } else { 0.0 })
        .collect();
    Ok(model.logits(&probe)?[target as usize])
}

/// Gaussian elimination with partial pivoting; consumes the system.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::input("singular coalition system; draw more coalitions"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Solves min Σ w_S (y_S − Σ_{j∈S} φ_j)² subject to Σ_j φ_j = Δ via the
/// bordered normal equations.
fn constrained_wls(ata: Vec<Vec<f64>>, aty: Vec<f64>, delta: f64) -> Result<Vec<f64>> {
    let l = aty.len();
    let mut a = vec![vec![0.0; l + 1]; l + 1];
    let mut b = vec![0.0; l + 1];
    for j in 0..l {
        for k in 0..l {
            a[j][k] = 2.0 * ata[j][k];
        }
        a[j][l] = 1.0;
        a[l][j] = 1.0;
        b[j] = 2.0 * aty[j];
    }
    b[l] = delta;
    let mut solution = solve_linear(a, b)?;
    solution.truncate(l);
    Ok(solution)
}

fn shapley_kernel_weight(l: usize, k: usize) -> f64 {
    let mut binom = 1.0;
    for i in 0..k {
        binom = binom * (l - i) as f64 / (i + 1) as f64;
    }
    (l - 1) as f64 / (binom * (k * (l - k)) as f64)
}

pub fn kernel_shap(
    model: &NetModel,
    inputs: &[f64],
    target: u8,
    mode: ShapMode,
    seed: u64,
) -> Result<Vec<f64>> {
    let l = inputs.len();
    if l == 0 {
        return Ok(Vec::new());
    }
    let v_empty = coalition_value(model, inputs, target, 0)?;
    let v_full = model.logits(inputs)?[target as usize];
    let delta = v_full - v_empty;

    let mut ata = vec![vec![0.0; l]; l];
    let mut aty = vec![0.0; l];
    let mut accumulate = |bits: u64, weight: f64, y: f64| {
        let members: Vec<usize> = (0..l).filter(|j| bits >> j & 1 == 1).collect();
        for &j in &members {
            aty[j] += weight * y;
            for &k in &members {
                ata[j][k] += weight;
            }
        }
    };

    match mode {
        ShapMode::Exact => {
            if l > 20 {
                return Err(Error::budget(format!(
                    "exact kernel_shap enumerates 2^{l} coalitions; refused above 20 inputs"
                )));
            }
            for bits in 1..(1u64 << l) - 1 {
                let k = bits.count_ones() as usize;
                let weight = shapley_kernel_weight(l, k);
                let y = coalition_value(model, inputs, target, bits)? - v_empty;
                accumulate(bits, weight, y);
            }
        }
        ShapMode::Sampled { n } => {
            if l < 2 {
                return Err(Error::input("sampled kernel_shap needs at least two inputs"));
            }
            if n < l + 2 {
                return Err(Error::config(format!(
                    "sampled kernel_shap needs at least {} coalitions for {l} inputs",
                    l + 2
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let size_weights: Vec<f64> =
                (1..l).map(|k| (l - 1) as f64 / (k * (l - k)) as f64).collect();
            let total_w: f64 = size_weights.iter().sum();
            let mut scratch: Vec<usize> = (0..l).collect();
            for _ in 0..n {
                let mut pick = rng.gen_range(0.0..total_w);
                let mut size = 1;
                for (i, w) in size_weights.iter().enumerate() {
                    if pick < *w {
                        size = i + 1;
                        break;
                    }
                    pick -= w;
                }
                // partial Fisher-Yates: the first `size` entries become the coalition
                for i in 0..size {
                    let j = rng.gen_range(i..l);
                    scratch.swap(i, j);
                }
                let bits = scratch[..size].iter().fold(0u64, |acc, &j| acc | 1 << j);
                let y = coalition_value(model, inputs, target, bits)? - v_empty;
                accumulate(bits, 1.0, y);
            }
        }
    }
    constrained_wls(ata, aty, delta)
}

/// Definitional Shapley values by direct subset enumeration; the independent
/// oracle for kernel_shap.
pub fn exact_shapley_reference(model: &NetModel, inputs: &[f64], target: u8) -> Result<Vec<f64>> {
    let l = inputs.len();
    if l > 12 {
        return Err(Error::budget(format!(
            "definitional shapley enumerates {l}! orderings worth of subsets; refused above 12 inputs"
        )));
    }
    let mut values = vec![0.0; 1 << l];
    for (bits, slot) in values.iter_mut().enumerate() {
        *slot = coalition_value(model, inputs, target, bits as u64)?;
    }
    let mut factorial = vec![1.0; l + 1];
    for i in 1..=l {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let mut phi = vec![0.0; l];
    for bits in 0..(1u64 << l) {
        let k = bits.count_ones() as usize;
        if k == l {
            continue;
        }
        let weight = factorial[k] * factorial[l - k - 1] / factorial[l];
        for j in 0..l {
            if bits >> j & 1 == 0 {
                phi[j] += weight * (values[(bits | 1 << j) as usize] - values[bits as usize]);
            }
        }
    }
    Ok(phi)
}
