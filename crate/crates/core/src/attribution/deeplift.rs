//! DeepLift with the rescale rule against the all-zeros reference.
//! Multipliers propagate backward exactly like gradients, except that each
//! nonlinearity contributes Δactivation/Δpre-activation instead of the local
//! derivative, which makes summation-to-delta hold by telescoping.

use crate::error::Result;
use crate::net::NetModel;

pub fn deeplift_rescale(model: &NetModel, inputs: &[f64], target: u8) -> Result<Vec<f64>> {
    let reference = vec![0.0; inputs.len()];
    let trace_x = model.forward_trace(inputs);
    let trace_r = model.forward_trace(&reference);

    // multiplier of the target logit w.r.t. the current layer's pre-activations
    let mut delta = vec![0.0; 2];
    delta[target as usize] = 1.0;
    let mut prev = Vec::new();
    for k in (0..model.layers.len()).rev() {
        model.layers[k].backward_input(&delta, &mut prev);
        if k == 0 {
            let scores = prev.iter().zip(inputs).map(|(m, x)| m * x).collect();
            return Ok(scores);
        }
        delta = prev
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let dz = trace_x.pre_activations[k - 1][i] - trace_r.pre_activations[k - 1][i];
                let da = trace_x.activations[k][i] - trace_r.activations[k][i];
                if dz.abs() < 1e-9 {
                    m * model.activation.derivative(trace_x.pre_activations[k - 1][i])
                } else {
                    m * da / dz
                }
            })
            .collect();
    }
    unreachable!("networks have at least one layer");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::test_support::*;
    use crate::net::Activation;

    #[test]
    fn summation_to_delta_is_exact() {
        for case in 0..60 {
            let (widths, activation): (&[usize], _) = if case % 2 == 0 {
                (&[8, 16, 2], Activation::Tanh)
            } else {
                (&[8, 12, 6, 2], Activation::Relu)
            };
            let model = random_model(widths, activation, 300 + case);
            let x = random_inputs(8, 400 + case);
            let target = (case % 2) as u8;
            let scores = deeplift_rescale(&model, &x, target).unwrap();
            let total: f64 = scores.iter().sum();
            let delta = model.logits(&x).unwrap()[target as usize]
                - model.logits(&vec![0.0; 8]).unwrap()[target as usize];
            assert!(
                (total - delta).abs() < 1e-9,
                "case {case}: sum {total} vs delta {delta}"
            );
        }
    }

    #[test]
    fn affine_region_matches_slope_times_input() {
        let model = positive_region_model(5, 8, 6);
        let slopes = affine_slopes(&model, 0);
        let x: Vec<f64> = random_inputs(5, 10).iter().map(|v| v.abs() + 0.01).collect();
        let scores = deeplift_rescale(&model, &x, 0).unwrap();
        for j in 0..5 {
            assert!((scores[j] - slopes[j] * x[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_input_scores_zero() {
        let model = random_model(&[6, 9, 2], Activation::Tanh, 2);
        let scores = deeplift_rescale(&model, &vec![0.0; 6], 1).unwrap();
        assert!(scores.iter().all(|&s| s == 0.0));
    }
}
