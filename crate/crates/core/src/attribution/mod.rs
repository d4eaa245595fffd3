//! Attribution methods over the trained network: every method assigns one
//! score per input for one sample, explaining the target logit against the
//! all-zeros reference point (the mask token).

mod deeplift;
mod lrp;
mod perturb;
mod shap;

pub use deeplift::deeplift_rescale;
pub use lrp::lrp_epsilon;
pub use perturb::{feature_permutation, occlusion};
pub use shap::{exact_shapley_reference, kernel_shap, ShapMode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::NetModel;
use crate::train::NumericSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Method {
    Gradient,
    GradientXInput,
    IntegratedGradients { steps: usize },
    DeepliftRescale,
    LrpEpsilon { epsilon: f64 },
    Occlusion,
    FeaturePermutation { repeats: usize },
    KernelShap { mode: ShapMode },
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gradient => "gradient",
            Method::GradientXInput => "gradient_x_input",
            Method::IntegratedGradients { .. } => "integrated_gradients",
            Method::DeepliftRescale => "deeplift_rescale",
            Method::LrpEpsilon { .. } => "lrp_epsilon",
            Method::Occlusion => "occlusion",
            Method::FeaturePermutation { .. } => "feature_permutation",
            Method::KernelShap { .. } => "kernel_shap",
        }
    }

    /// The method set the experiment grid runs by default.
    pub fn default_grid() -> Vec<Method> {
        vec![
            Method::Gradient,
            Method::GradientXInput,
            Method::IntegratedGradients { steps: 128 },
            Method::DeepliftRescale,
            Method::LrpEpsilon { epsilon: 1e-6 },
            Method::Occlusion,
            Method::FeaturePermutation { repeats: 4 },
            Method::KernelShap { mode: ShapMode::Exact },
        ]
    }

    fn validate(self) -> Result<()> {
        match self {
            Method::IntegratedGradients { steps } if steps < 16 => {
                Err(Error::config("integrated_gradients needs at least 16 steps"))
            }
            Method::LrpEpsilon { epsilon } if !(epsilon > 0.0) => {
                Err(Error::config("lrp epsilon must be positive"))
            }
            Method::FeaturePermutation { repeats } if repeats == 0 => {
                Err(Error::config("feature_permutation needs at least one repeat"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreTransform {
    #[default]
    Identity,
    Abs,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    Predicted,
    Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    #[serde(default)]
    pub score_transform: ScoreTransform,
    #[serde(default)]
    pub target: Target,
    #[serde(default)]
    pub seed: u64,
}

impl MethodSpec {
    pub fn new(method: Method) -> Self {
        MethodSpec { method, score_transform: ScoreTransform::default(), target: Target::default(), seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.method.validate()
    }

    fn resolve_target(&self, model: &NetModel, inputs: &[f64], label: u8) -> Result<u8> {
        Ok(match self.target {
            Target::Predicted => model.predict(inputs)?,
            Target::Label => label,
        })
    }

    fn finish(&self, mut scores: Vec<f64>) -> Result<Vec<f64>> {
        if let ScoreTransform::Abs = self.score_transform {
            for s in scores.iter_mut() {
                *s = s.abs();
            }
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::training("attribution produced a non-finite score"));
        }
        Ok(scores)
    }
}

pub fn gradient(model: &NetModel, inputs: &[f64], target: u8) -> Result<Vec<f64>> {
    model.input_gradient(inputs, target)
}

pub fn gradient_x_input(model: &NetModel, inputs: &[f64], target: u8) -> Result<Vec<f64>> {
    let grad = model.input_gradient(inputs, target)?;
    Ok(grad.iter().zip(inputs).map(|(g, x)| g * x).collect())
}

/// Riemann-midpoint path integral from the all-zeros point to the input.
pub fn integrated_gradients(model: &NetModel, inputs: &[f64], target: u8, steps: usize) -> Result<Vec<f64>> {
    let mut avg = vec![0.0; inputs.len()];
    let mut point = vec![0.0; inputs.len()];
    for k in 0..steps {
        let alpha = (k as f64 + 0.5) / steps as f64;
        for (p, x) in point.iter_mut().zip(inputs) {
            *p = alpha * x;
        }
        let grad = model.input_gradient(&point, target)?;
        for (a, g) in avg.iter_mut().zip(&grad) {
            *a += g;
        }
    }
    Ok(avg.iter().zip(inputs).map(|(a, x)| a / steps as f64 * x).collect())
}

/// One score vector for one sample. `feature_permutation` is defined over an
/// evaluation set, not a single sample; use [`attribute_batch`] for it.
pub fn attribute(model: &NetModel, inputs: &[f64], label: u8, spec: &MethodSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let target = spec.resolve_target(model, inputs, label)?;
    let raw = match spec.method {
        Method::Gradient => gradient(model, inputs, target)?,
        Method::GradientXInput => gradient_x_input(model, inputs, target)?,
        Method::IntegratedGradients { steps } => integrated_gradients(model, inputs, target, steps)?,
        Method::DeepliftRescale => deeplift_rescale(model, inputs, target)?,
        Method::LrpEpsilon { epsilon } => lrp_epsilon(model, inputs, target, epsilon)?,
        Method::Occlusion => occlusion(model, inputs, target)?,
        Method::KernelShap { mode } => kernel_shap(model, inputs, target, mode, spec.seed)?,
        Method::FeaturePermutation { .. } => {
            return Err(Error::input(
                "feature_permutation scores whole evaluation sets; call attribute_batch",
            ))
        }
    };
    spec.finish(raw)
}

/// Score vectors for every sample in the set, in set order.
pub fn attribute_batch(model: &NetModel, set: &NumericSet, spec: &MethodSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if let Method::FeaturePermutation { repeats } = spec.method {
        let raw = feature_permutation(model, set, spec.target, repeats, spec.seed)?;
        return raw.into_iter().map(|scores| spec.finish(scores)).collect();
    }
    set.xs
        .iter()
        .zip(&set.ys)
        .map(|(x, &y)| attribute(model, x, y, spec))
        .collect()
}
