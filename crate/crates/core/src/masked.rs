//! Masked-sample semantics: three-valued truth evaluation and exact class
//! probability under uniform completion of the masked entries.

use std::fmt;

use num::rational::Ratio;
use num::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::logic::{eval_sample, Domain, FormulaSpec, GateKind};
use crate::value::Value;

pub type Prob = Ratio<i128>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriValue {
    True,
    False,
    Unknown,
}

impl TriValue {
    pub fn is_determined(self) -> bool {
        self != TriValue::Unknown
    }

    fn as_option(self) -> Option<bool> {
        match self {
            TriValue::True => Some(true),
            TriValue::False => Some(false),
            TriValue::Unknown => None,
        }
    }
}

impl fmt::Display for TriValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriValue::True => "true",
            TriValue::False => "false",
            TriValue::Unknown => "unknown",
        })
    }
}

/// One sample with some entries masked out. `None` is a masked entry.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MaskedSample {
    pub entries: Vec<Option<Value>>,
}

impl MaskedSample {
    pub fn new(entries: Vec<Option<Value>>) -> Self {
        MaskedSample { entries }
    }

    pub fn from_inputs(inputs: &[Value], mask: &[bool]) -> Self {
        let entries = inputs
            .iter()
            .zip(mask)
            .map(|(&v, &masked)| if masked { None } else { Some(v) })
            .collect();
        MaskedSample { entries }
    }

    pub fn masked_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_none()).count()
    }

    /// Numeric view for model input: masked entries become the token 0.0.
    pub fn numeric(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.map(Value::to_f64).unwrap_or(0.0))
            .collect()
    }
}

fn check_masked(spec: &FormulaSpec, masked: &MaskedSample, domain: &Domain) -> Result<()> {
    if masked.entries.len() != spec.len() {
        return Err(Error::input(format!(
            "expected {} entries, got {}",
            spec.len(),
            masked.entries.len()
        )));
    }
    for e in masked.entries.iter().flatten() {
        if !domain.contains(*e) {
            return Err(Error::input(format!("value {e} is not in the alphabet")));
        }
    }
    Ok(())
}

/// Three-valued gate rule over possibly-masked boolean inputs. Exact for
/// gates whose masked inputs can independently complete to either truth
/// value, which holds because T is a nonempty proper subset of M.
fn tri_gate(kind: GateKind, inputs: &[Option<bool>]) -> TriValue {
    let known_true = inputs.iter().filter(|i| **i == Some(true)).count();
    let masked = inputs.iter().filter(|i| i.is_none()).count();
    let known_false = inputs.len() - known_true - masked;
    match kind {
        GateKind::And => {
            if known_false > 0 {
                TriValue::False
            } else if masked == 0 {
                TriValue::True
            } else {
                TriValue::Unknown
            }
        }
        GateKind::Or => {
            if known_true > 0 {
                TriValue::True
            } else if masked == 0 {
                TriValue::False
            } else {
                TriValue::Unknown
            }
        }
        GateKind::Xor => {
            if known_true >= 2 {
                TriValue::False
            } else if masked == 0 {
                if known_true == 1 {
                    TriValue::True
                } else {
                    TriValue::False
                }
            } else {
                TriValue::Unknown
            }
        }
    }
}

/// Evaluates a masked sample to True/False when every completion agrees on
/// the label, Unknown otherwise. Baseline entries never participate.
pub fn tri_eval(spec: &FormulaSpec, masked: &MaskedSample, domain: &Domain) -> Result<TriValue> {
    check_masked(spec, masked, domain)?;
    let states: Vec<Option<bool>> = masked
        .entries
        .iter()
        .map(|e| e.map(|v| domain.is_positive(v)))
        .collect();
    let gate_values: Vec<Option<bool>> = spec
        .gates()
        .iter()
        .map(|g| tri_gate(g.kind, &states[g.range()]).as_option())
        .collect();
    Ok(tri_gate(spec.top_level(), &gate_values))
}

/// P(gate true) for independent inputs with the given per-input
/// probabilities of being true.
fn prob_gate(kind: GateKind, probs: &[Prob]) -> Prob {
    match kind {
        GateKind::And => probs.iter().product(),
        GateKind::Or => Prob::one() - probs.iter().map(|p| Prob::one() - p).product::<Prob>(),
        GateKind::Xor => {
            let mut total = Prob::zero();
            for i in 0..probs.len() {
                let mut term = probs[i].clone();
                for (j, p) in probs.iter().enumerate() {
                    if j != i {
                        term *= Prob::one() - p;
                    }
                }
                total += term;
            }
            total
        }
    }
}

/// Exact P(class 1) with each masked entry uniform over the alphabet, so a
/// masked slot is true with probability |T|/|M|. Gates read disjoint inputs,
/// hence are independent, and the per-gate probabilities compose exactly at
/// the top level with the same product/complement/exactly-one formulas.
pub fn class_prob_exact(spec: &FormulaSpec, masked: &MaskedSample, domain: &Domain) -> Result<Prob> {
    check_masked(spec, masked, domain)?;
    let masked_positive = Prob::new(domain.positives().len() as i128, domain.size() as i128);
    let slot_probs: Vec<Prob> = masked
        .entries
        .iter()
        .map(|e| match e {
            Some(v) if domain.is_positive(*v) => Prob::one(),
            Some(_) => Prob::zero(),
            None => masked_positive.clone(),
        })
        .collect();
    let gate_probs: Vec<Prob> = spec
        .gates()
        .iter()
        .map(|g| prob_gate(g.kind, &slot_probs[g.range()]))
        .collect();
    Ok(prob_gate(spec.top_level(), &gate_probs))
}

pub fn class_prob(spec: &FormulaSpec, masked: &MaskedSample, domain: &Domain) -> Result<f64> {
    Ok(class_prob_exact(spec, masked, domain)?
        .to_f64()
        .expect("probability ratio converts to f64"))
}

/// Brute-force ground truth for the masked semantics: enumerates every
/// completion of the masked entries and counts label-1 outcomes. Costs
/// |M|^(masked count) evaluations; meant for verification, not pipelines.
pub fn completion_counts(
    spec: &FormulaSpec,
    masked: &MaskedSample,
    domain: &Domain,
) -> Result<(u64, u64)> {
    check_masked(spec, masked, domain)?;
    let free: Vec<usize> = (0..masked.entries.len())
        .filter(|&i| masked.entries[i].is_none())
        .collect();
    let mut inputs: Vec<Value> = masked
        .entries
        .iter()
        .map(|e| e.unwrap_or(domain.values()[0]))
        .collect();
    let total = (domain.size() as u64).pow(free.len() as u32);
    let mut digits = vec![0usize; free.len()];
    let mut ones = 0u64;
    for _ in 0..total {
        ones += eval_sample(spec, &inputs, domain)? as u64;
        for (slot, &pos) in free.iter().enumerate() {
            digits[slot] += 1;
            if digits[slot] < domain.size() {
                inputs[pos] = domain.values()[digits[slot]];
                break;
            }
            digits[slot] = 0;
            inputs[pos] = domain.values()[0];
        }
    }
    Ok((ones, total))
}

/// The tri-value implied by exhaustive completion counts.
pub fn tri_from_counts(ones: u64, total: u64) -> TriValue {
    if ones == total {
        TriValue::True
    } else if ones == 0 {
        TriValue::False
    } else {
        TriValue::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{enumerate_dataset, BlockSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binary_domain() -> Domain {
        Domain::new(
            vec![Value::integer(-1), Value::integer(1)],
            vec![Value::integer(1)],
        )
        .unwrap()
    }

    fn two_in_spec(top: GateKind) -> FormulaSpec {
        FormulaSpec::new(
            BlockSpec::new(1, 2),
            BlockSpec::new(1, 2),
            BlockSpec::new(1, 2),
            2,
            top,
        )
        .unwrap()
    }

    /// Single And gate over 2 inputs plus 1 baseline input, l = 3.
    fn tiny_spec(kind: GateKind) -> FormulaSpec {
        let (and, or, xor) = match kind {
            GateKind::And => (BlockSpec::new(1, 2), BlockSpec::new(0, 1), BlockSpec::new(0, 1)),
            GateKind::Or => (BlockSpec::new(0, 1), BlockSpec::new(1, 2), BlockSpec::new(0, 1)),
            GateKind::Xor => (BlockSpec::new(0, 1), BlockSpec::new(0, 1), BlockSpec::new(1, 2)),
        };
        FormulaSpec::new(and, or, xor, 1, kind).unwrap()
    }

    #[test]
    fn tri_gate_rules_match_the_three_valued_tables() {
        let pos = Some(true);
        let neg = Some(false);
        assert_eq!(tri_gate(GateKind::And, &[None, neg]), TriValue::False);
        assert_eq!(tri_gate(GateKind::And, &[pos, pos]), TriValue::True);
        assert_eq!(tri_gate(GateKind::And, &[pos, None]), TriValue::Unknown);
        assert_eq!(tri_gate(GateKind::Or, &[None, pos]), TriValue::True);
        assert_eq!(tri_gate(GateKind::Or, &[neg, neg]), TriValue::False);
        assert_eq!(tri_gate(GateKind::Or, &[neg, None]), TriValue::Unknown);
        assert_eq!(tri_gate(GateKind::Xor, &[pos, None]), TriValue::Unknown);
        assert_eq!(tri_gate(GateKind::Xor, &[pos, pos, None]), TriValue::False);
        assert_eq!(tri_gate(GateKind::Xor, &[pos, neg]), TriValue::True);
        assert_eq!(tri_gate(GateKind::Xor, &[neg, neg]), TriValue::False);
        assert_eq!(tri_gate(GateKind::Xor, &[neg, None]), TriValue::Unknown);
    }

    #[test]
    fn tri_eval_matches_completion_enumeration_exhaustively_on_small_specs() {
        let domain = binary_domain();
        for kind in [GateKind::And, GateKind::Or, GateKind::Xor] {
            let spec = tiny_spec(kind);
            let dataset = enumerate_dataset(&spec, &domain, 1 << 20).unwrap();
            for sample in &dataset.samples {
                for mask_bits in 0..(1u32 << spec.len()) {
                    let mask: Vec<bool> =
                        (0..spec.len()).map(|i| mask_bits >> i & 1 == 1).collect();
                    let masked = MaskedSample::from_inputs(&sample.inputs, &mask);
                    let (ones, total) = completion_counts(&spec, &masked, &domain).unwrap();
                    assert_eq!(
                        tri_eval(&spec, &masked, &domain).unwrap(),
                        tri_from_counts(ones, total),
                        "spec {kind}, sample {:?}, mask {mask:?}",
                        sample.inputs
                    );
                }
            }
        }
    }

    #[test]
    fn tri_eval_matches_completion_enumeration_on_random_three_gate_cases() {
        let domain = binary_domain();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for top in [GateKind::And, GateKind::Or, GateKind::Xor] {
            let spec = two_in_spec(top);
            let dataset = enumerate_dataset(&spec, &domain, 1 << 20).unwrap();
            for _ in 0..300 {
                let sample = &dataset.samples[rng.gen_range(0..dataset.len())];
                let mask: Vec<bool> = (0..spec.len()).map(|_| rng.gen_bool(0.5)).collect();
                let masked = MaskedSample::from_inputs(&sample.inputs, &mask);
                let (ones, total) = completion_counts(&spec, &masked, &domain).unwrap();
                assert_eq!(
                    tri_eval(&spec, &masked, &domain).unwrap(),
                    tri_from_counts(ones, total)
                );
            }
        }
    }

    #[test]
    fn class_prob_equals_completion_ratio_exhaustively_on_small_specs() {
        let domain = binary_domain();
        for kind in [GateKind::And, GateKind::Or, GateKind::Xor] {
            let spec = tiny_spec(kind);
            let dataset = enumerate_dataset(&spec, &domain, 1 << 20).unwrap();
            for sample in &dataset.samples {
                for mask_bits in 0..(1u32 << spec.len()) {
                    let mask: Vec<bool> =
                        (0..spec.len()).map(|i| mask_bits >> i & 1 == 1).collect();
                    let masked = MaskedSample::from_inputs(&sample.inputs, &mask);
                    let (ones, total) = completion_counts(&spec, &masked, &domain).unwrap();
                    let expected = Prob::new(ones as i128, total as i128);
                    assert_eq!(
                        class_prob_exact(&spec, &masked, &domain).unwrap(),
                        expected
                    );
                }
            }
        }
    }

    #[test]
    fn class_prob_fully_masked_and_top_is_3_over_32() {
        // Frozen after checking the completion ratio below: 24 of 256
        // completions are class 1, and 24/256 = 3/32.
        let domain = binary_domain();
        let spec = two_in_spec(GateKind::And);
        let masked = MaskedSample::new(vec![None; 8]);
        let (ones, total) = completion_counts(&spec, &masked, &domain).unwrap();
        assert_eq!((ones, total), (24, 256));
        assert_eq!(
            class_prob_exact(&spec, &masked, &domain).unwrap(),
            Prob::new(3, 32)
        );
    }

    #[test]
    fn class_prob_binary_and_gate_fully_masked_is_one_quarter() {
        let domain = binary_domain();
        let spec = tiny_spec(GateKind::And);
        let masked = MaskedSample::new(vec![None, None, Some(Value::integer(1))]);
        assert_eq!(
            class_prob_exact(&spec, &masked, &domain).unwrap(),
            Prob::new(1, 4)
        );
    }

    #[test]
    fn class_prob_without_masking_degenerates_to_the_label() {
        let domain = binary_domain();
        for top in [GateKind::And, GateKind::Or, GateKind::Xor] {
            let spec = two_in_spec(top);
            let dataset = enumerate_dataset(&spec, &domain, 1 << 20).unwrap();
            for sample in &dataset.samples {
                let masked = MaskedSample::from_inputs(&sample.inputs, &vec![false; 8]);
                let p = class_prob_exact(&spec, &masked, &domain).unwrap();
                assert_eq!(p, Prob::new(sample.label as i128, 1));
            }
        }
    }

    #[test]
    fn quaternary_alphabet_probabilities_stay_exact() {
        let domain = Domain::new(
            vec![Value::integer(-1), Value::new(-1, 3), Value::new(1, 3), Value::integer(1)],
            vec![Value::new(-1, 3), Value::integer(1)],
        )
        .unwrap();
        let spec = two_in_spec(GateKind::And);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let entries: Vec<Option<Value>> = (0..8)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        None
                    } else {
                        Some(domain.values()[rng.gen_range(0..4)])
                    }
                })
                .collect();
            let masked = MaskedSample::new(entries);
            let (ones, total) = completion_counts(&spec, &masked, &domain).unwrap();
            assert_eq!(
                class_prob_exact(&spec, &masked, &domain).unwrap(),
                Prob::new(ones as i128, total as i128)
            );
        }
    }

    #[test]
    fn numeric_form_uses_the_zero_token() {
        let masked = MaskedSample::new(vec![Some(Value::new(-1, 3)), None, Some(Value::integer(1))]);
        assert_eq!(masked.numeric(), vec![-1.0 / 3.0, 0.0, 1.0]);
        assert_eq!(masked.masked_count(), 1);
    }
}
