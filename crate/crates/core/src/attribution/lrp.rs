//! Layer-wise relevance propagation with the ε rule. The target logit's
//! value is distributed backward; each linear layer splits a neuron's
//! relevance over its inputs in proportion to their contributions
//! a_i·w_oi / (z'_o + ε·sign(z'_o)), where z'_o excludes the bias so the
//! propagated total stays conserved up to ε.

use crate::error::{Error, Result};
use crate::net::NetModel;

fn stabilized(z: f64, epsilon: f64) -> f64 {
    if z >= 0.0 {
        z + epsilon
    } else {
        z - epsilon
    }
}

pub fn lrp_epsilon(model: &NetModel, inputs: &[f64], target: u8, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::config("lrp epsilon must be positive"));
    }
    let trace = model.forward_trace(inputs);
    let logit = trace.pre_activations.last().unwrap()[target as usize];

    let mut relevance = vec![0.0; 2];
    relevance[target as usize] = logit;
    for k in (0..model.layers.len()).rev() {
        let layer = &model.layers[k];
        let a_prev = &trace.activations[k];
        let mut rel_prev = vec![0.0; layer.in_dim];
        for o in 0..layer.out_dim {
            if relevance[o] == 0.0 {
                continue;
            }
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            let z_no_bias: f64 = row.iter().zip(a_prev).map(|(w, a)| w * a).sum();
            let denom = stabilized(z_no_bias, epsilon);
            for (i, (w, a)) in row.iter().zip(a_prev).enumerate() {
                rel_prev[i] += relevance[o] * (w * a) / denom;
            }
        }
        relevance = rel_prev;
    }
    Ok(relevance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::test_support::*;
    use crate::net::Activation;

    #[test]
    fn conservation_within_five_percent_of_the_logit() {
        for case in 0..60 {
            let widths: &[usize] = if case % 2 == 0 { &[8, 16, 2] } else { &[8, 10, 10, 2] };
            let model = random_model(widths, Activation::Tanh, 500 + case);
            let x = random_inputs(8, 600 + case);
            let target = (case % 2) as u8;
            let logit = model.logits(&x).unwrap()[target as usize];
            let scores = lrp_epsilon(&model, &x, target, 1e-6).unwrap();
            let total: f64 = scores.iter().sum();
            assert!(
                (total - logit).abs() <= 0.05 * logit.abs(),
                "case {case}: sum {total} vs logit {logit}"
            );
        }
    }

    #[test]
    fn sign_zero_denominator_is_stabilized_positive() {
        assert_eq!(stabilized(0.0, 1e-6), 1e-6);
        assert_eq!(stabilized(2.0, 1e-6), 2.0 + 1e-6);
        assert_eq!(stabilized(-2.0, 1e-6), -2.0 - 1e-6);
    }

    #[test]
    fn zero_input_gets_zero_relevance() {
        let model = random_model(&[6, 8, 2], Activation::Tanh, 9);
        let mut x = random_inputs(6, 4);
        x[3] = 0.0;
        let scores = lrp_epsilon(&model, &x, 1, 1e-6).unwrap();
        assert_eq!(scores[3], 0.0, "a_i = 0 contributes nothing");
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let model = random_model(&[4, 5, 2], Activation::Tanh, 1);
        let x = random_inputs(4, 1);
        assert!(lrp_epsilon(&model, &x, 0, 0.0).is_err());
        assert!(lrp_epsilon(&model, &x, 0, -1e-3).is_err());
    }
}
