//! Score-to-mask conversion (least-relevant-first) and mask application.
//! Thresholds are strictly per sample; the two rules differ in how ties are
//! treated: the baseline's own maximum must never survive, while an exactly
//! average score does.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{FormulaSpec, Sample};
use crate::masked::MaskedSample;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// t = highest baseline-input score; mask score ≤ t.
    BaselineMax,
    /// t = factor × mean of all scores; mask score < t.
    AvgFactor { factor: f64 },
}

impl ThresholdRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdRule::AvgFactor { factor } if !(*factor > 0.0) => {
                Err(Error::config("avg_factor threshold needs a positive factor"))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ThresholdRule::BaselineMax => "baseline_max".to_string(),
            ThresholdRule::AvgFactor { factor } => format!("t{factor:.1}"),
        }
    }

    /// The grid default: baseline_max plus the three factor thresholds.
    pub fn default_grid() -> Vec<ThresholdRule> {
        vec![
            ThresholdRule::BaselineMax,
            ThresholdRule::AvgFactor { factor: 1.0 },
            ThresholdRule::AvgFactor { factor: 0.8 },
            ThresholdRule::AvgFactor { factor: 0.5 },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskPlan {
    /// true = masked
    pub mask: Vec<bool>,
    pub threshold: f64,
    pub rule: ThresholdRule,
}

impl MaskPlan {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn mask_fraction(&self) -> f64 {
        self.masked_count() as f64 / self.mask.len() as f64
    }
}

pub fn compute_mask(scores: &[f64], rule: ThresholdRule, spec: &FormulaSpec) -> Result<MaskPlan> {
    rule.validate()?;
    if scores.len() != spec.len() {
        return Err(Error::input(format!(
            "expected {} scores, got {}",
            spec.len(),
            scores.len()
        )));
    }
    let (threshold, mask): (f64, Vec<bool>) = match rule {
        ThresholdRule::BaselineMax => {
            let baseline = spec.baseline_range();
            if baseline.is_empty() {
                return Err(Error::config(
                    "baseline_max threshold needs at least one baseline input",
                ));
            }
            let t = scores[baseline]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            (t, scores.iter().map(|&s| s <= t).collect())
        }
        ThresholdRule::AvgFactor { factor } => {
            let t = factor * scores.iter().sum::<f64>() / scores.len() as f64;
            (t, scores.iter().map(|&s| s < t).collect())
        }
    };
    Ok(MaskPlan { mask, threshold, rule })
}

/// Masked view of one sample; masked entries read as the token 0 numerically.
pub fn apply_mask(sample: &Sample, plan: &MaskPlan) -> Result<MaskedSample> {
    if plan.mask.len() != sample.inputs.len() {
        return Err(Error::input(format!(
            "mask length {} does not fit sample with {} inputs",
            plan.mask.len(),
            sample.inputs.len()
        )));
    }
    Ok(MaskedSample::from_inputs(&sample.inputs, &plan.mask))
}

/// Numeric vector with masked entries zeroed, without the MaskedSample view.
pub fn masked_numeric(inputs: &[Value], mask: &[bool]) -> Vec<f64> {
    inputs
        .iter()
        .zip(mask)
        .map(|(v, &m)| if m { 0.0 } else { v.to_f64() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{enumerate_dataset, GateKind};
    use crate::oracle::{oracle_scores, structural_r_min};
    use crate::presets::Preset;

    fn spec() -> FormulaSpec {
        Preset::TwoInBinary.spec(GateKind::And)
    }

    #[test]
    fn baseline_max_masks_every_baseline_and_ties() {
        let scores = [0.9, 0.3, 0.3, 0.5, 0.1, 0.8, 0.3, 0.2];
        let plan = compute_mask(&scores, ThresholdRule::BaselineMax, &spec()).unwrap();
        assert_eq!(plan.threshold, 0.3);
        assert_eq!(
            plan.mask,
            vec![false, true, true, false, true, false, true, true],
            "scores tied with the baseline max are masked"
        );
        assert!(plan.mask[6] && plan.mask[7], "baseline always masked");
    }

    #[test]
    fn all_equal_scores_mask_everything_under_baseline_max() {
        let scores = [0.4; 8];
        let plan = compute_mask(&scores, ThresholdRule::BaselineMax, &spec()).unwrap();
        assert_eq!(plan.masked_count(), 8);
        assert_eq!(plan.mask_fraction(), 1.0);
    }

    #[test]
    fn avg_factor_keeps_exactly_average_scores() {
        let mut scores = [0.0; 8];
        scores[0] = 1.0;
        let plan = compute_mask(&scores, ThresholdRule::AvgFactor { factor: 1.0 }, &spec()).unwrap();
        assert_eq!(plan.threshold, 0.125);
        assert_eq!(plan.masked_count(), 7, "only the first input survives");
        assert!(!plan.mask[0]);

        let uniform = [0.25; 8];
        let plan = compute_mask(&uniform, ThresholdRule::AvgFactor { factor: 1.0 }, &spec()).unwrap();
        assert_eq!(plan.masked_count(), 0, "exactly average survives the strict <");
    }

    #[test]
    fn oracle_scores_with_baseline_max_mask_exactly_the_irrelevant() {
        let preset = Preset::TwoInBinary;
        let data = enumerate_dataset(&preset.spec(GateKind::And), &preset.domain(), 1 << 16).unwrap();
        for sample in data.samples.iter().step_by(17) {
            let reasoning = structural_r_min(&data.spec, sample, &data.domain).unwrap();
            let scores = oracle_scores(&data.spec, &reasoning);
            let plan = compute_mask(&scores, ThresholdRule::BaselineMax, &data.spec).unwrap();
            for j in 0..8 {
                let relevant = reasoning.relevant.contains(&j);
                assert_eq!(plan.mask[j], !relevant, "sample {} input {j}", sample.id);
            }
        }
    }

    #[test]
    fn baseline_max_requires_baseline_inputs() {
        let bare = FormulaSpec::new(
            crate::logic::BlockSpec::new(1, 2),
            crate::logic::BlockSpec::new(1, 2),
            crate::logic::BlockSpec::new(1, 2),
            0,
            GateKind::And,
        )
        .unwrap();
        let scores = [0.1; 6];
        assert!(compute_mask(&scores, ThresholdRule::BaselineMax, &bare).is_err());
    }

    #[test]
    fn apply_mask_produces_token_zeros() {
        let preset = Preset::TwoInBinary;
        let data = enumerate_dataset(&preset.spec(GateKind::Or), &preset.domain(), 1 << 16).unwrap();
        let sample = &data.samples[37];
        let plan = MaskPlan {
            mask: vec![true, false, true, false, true, false, true, false],
            threshold: 0.0,
            rule: ThresholdRule::BaselineMax,
        };
        let masked = apply_mask(sample, &plan).unwrap();
        let numeric = masked.numeric();
        for j in 0..8 {
            if plan.mask[j] {
                assert_eq!(numeric[j], 0.0);
                assert!(masked.entries[j].is_none());
            } else {
                assert_eq!(numeric[j], sample.inputs[j].to_f64());
                assert_eq!(masked.entries[j], Some(sample.inputs[j]));
            }
        }
        assert_eq!(numeric, masked_numeric(&sample.inputs, &plan.mask));

        let empty = MaskPlan { mask: vec![false; 8], threshold: 0.0, rule: ThresholdRule::BaselineMax };
        let identity = apply_mask(sample, &empty).unwrap();
        assert_eq!(identity.masked_count(), 0);
        let full = MaskPlan { mask: vec![true; 8], threshold: 0.0, rule: ThresholdRule::BaselineMax };
        let blank = apply_mask(sample, &full).unwrap();
        assert!(blank.numeric().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn threshold_labels_are_stable() {
        assert_eq!(ThresholdRule::BaselineMax.label(), "baseline_max");
        assert_eq!(ThresholdRule::AvgFactor { factor: 1.0 }.label(), "t1.0");
        assert_eq!(ThresholdRule::AvgFactor { factor: 0.8 }.label(), "t0.8");
        assert_eq!(ThresholdRule::AvgFactor { factor: 0.5 }.label(), "t0.5");
    }
}
