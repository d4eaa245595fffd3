//! Evaluation metrics over scores, masks, and retrained predictions:
//! baseline-score violations (NIB/GIB), three-valued and probabilistic
//! masked accuracy, and the two double-class-assignment rates that detect
//! class information hidden in the mask pattern itself.

use std::collections::BTreeMap;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{eval_gate, Domain, FormulaSpec, GateKind, Sample};
use crate::masked::{class_prob_exact, tri_eval, MaskedSample, TriValue};
use crate::oracle::ReasoningSets;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NibVariant {
    /// Any member of any minimal set at or below the baseline maximum.
    Strict,
    /// No minimal set fully survives above the baseline maximum.
    Coverage,
}

fn baseline_max(scores: &[f64], spec: &FormulaSpec) -> Result<f64> {
    if spec.baseline_len() == 0 {
        return Err(Error::config("baseline violation metrics need baseline inputs"));
    }
    if scores.len() != spec.len() {
        return Err(Error::input(format!(
            "expected {} scores, got {}",
            spec.len(),
            scores.len()
        )));
    }
    Ok(scores[spec.baseline_range()]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn nib_violation(
    scores: &[f64],
    reasoning: &ReasoningSets,
    spec: &FormulaSpec,
    variant: NibVariant,
) -> Result<bool> {
    let b = baseline_max(scores, spec)?;
    let buried = |r: &Vec<usize>| r.iter().any(|&j| scores[j] <= b);
    Ok(match variant {
        NibVariant::Strict => reasoning.r_min.iter().any(buried),
        NibVariant::Coverage => reasoning.r_min.iter().all(buried),
    })
}

pub fn gib_violation(scores: &[f64], reasoning: &ReasoningSets, spec: &FormulaSpec) -> Result<bool> {
    let b = baseline_max(scores, spec)?;
    Ok(reasoning.relevant.iter().any(|&j| scores[j] <= b))
}

/// Three-valued evaluation; Unknown counts as incorrect.
pub fn logical_correct(
    spec: &FormulaSpec,
    masked: &MaskedSample,
    domain: &Domain,
    label: u8,
) -> Result<bool> {
    Ok(match tri_eval(spec, masked, domain)? {
        TriValue::Unknown => false,
        TriValue::True => label == 1,
        TriValue::False => label == 0,
    })
}

/// Majority class over uniform completions of the masked inputs; an exact
/// 50/50 tie predicts class 0.
pub fn statistical_prediction(spec: &FormulaSpec, masked: &MaskedSample, domain: &Domain) -> Result<u8> {
    let p = class_prob_exact(spec, masked, domain)?;
    Ok(u8::from(p > Ratio::new(1, 2)))
}

pub fn statistical_correct(
    spec: &FormulaSpec,
    masked: &MaskedSample,
    domain: &Domain,
    label: u8,
) -> Result<bool> {
    Ok(statistical_prediction(spec, masked, domain)? == label)
}

/// Percentage with optional per-class slices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    pub overall: f64,
    pub class0: Option<f64>,
    pub class1: Option<f64>,
}

impl PerClass {
    /// Percent of true flags, overall and per label.
    pub fn from_flags(flags: &[bool], labels: &[u8]) -> Self {
        PerClass::from_values(
            &flags.iter().map(|&f| if f { 100.0 } else { 0.0 }).collect::<Vec<_>>(),
            labels,
        )
    }

    /// Mean of values, overall and per label.
    pub fn from_values(values: &[f64], labels: &[u8]) -> Self {
        assert_eq!(values.len(), labels.len());
        let mean = |keep: &dyn Fn(u8) -> bool| {
            let mut sum = 0.0;
            let mut n = 0usize;
            for (v, &y) in values.iter().zip(labels) {
                if keep(y) {
                    sum += v;
                    n += 1;
                }
            }
            (n > 0).then(|| sum / n as f64)
        };
        PerClass {
            overall: mean(&|_| true).unwrap_or(f64::NAN),
            class0: mean(&|y| y == 0),
            class1: mean(&|y| y == 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullDcaOutcome {
    /// % of considered samples that sit in a conflicting group.
    pub sample_weighted: PerClass,
    /// % of groups that conflict.
    pub group_weighted: f64,
    pub considered: usize,
    pub groups: usize,
    pub conflicting_groups: usize,
}

/// Double class assignment over full masked evidence. Considers only samples
/// where base and retrained predictions agree, groups them by their masked
/// non-baseline entries (mask markers included), and flags groups whose
/// retrained predictions disagree. None when nothing qualifies.
pub fn full_dca(
    masked: &[MaskedSample],
    labels: &[u8],
    base_preds: &[u8],
    retrained_preds: &[u8],
    spec: &FormulaSpec,
) -> Result<Option<FullDcaOutcome>> {
    let n = masked.len();
    if labels.len() != n || base_preds.len() != n || retrained_preds.len() != n {
        return Err(Error::input("misaligned metric inputs"));
    }
    let informative = spec.len() - spec.baseline_len();
    let mut groups: BTreeMap<Vec<Option<Value>>, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        if base_preds[i] != retrained_preds[i] {
            continue;
        }
        if masked[i].entries.len() != spec.len() {
            return Err(Error::input("masked sample length does not match the formula"));
        }
        let key = masked[i].entries[..informative].to_vec();
        groups.entry(key).or_default().push(i);
    }
    if groups.is_empty() {
        return Ok(None);
    }
    let considered: usize = groups.values().map(Vec::len).sum();
    let mut conflicting_groups = 0usize;
    let mut in_conflict = vec![false; n];
    for members in groups.values() {
        let first = retrained_preds[members[0]];
        if members.iter().any(|&i| retrained_preds[i] != first) {
            conflicting_groups += 1;
            for &i in members {
                in_conflict[i] = true;
            }
        }
    }
    let considered_idx: Vec<usize> = groups.values().flatten().copied().collect();
    let flags: Vec<bool> = considered_idx.iter().map(|&i| in_conflict[i]).collect();
    let considered_labels: Vec<u8> = considered_idx.iter().map(|&i| labels[i]).collect();
    Ok(Some(FullDcaOutcome {
        sample_weighted: PerClass::from_flags(&flags, &considered_labels),
        group_weighted: conflicting_groups as f64 / groups.len() as f64 * 100.0,
        considered,
        groups: groups.len(),
        conflicting_groups,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalDcaOutcome {
    /// One entry per gate in block order; None when no sample was pivotal.
    pub per_gate: Vec<Option<f64>>,
    /// Mean over the defined gates.
    pub aggregate: Option<f64>,
}

fn gate_outputs(spec: &FormulaSpec, sample: &Sample, domain: &Domain) -> Result<Vec<bool>> {
    let mut outputs = Vec::with_capacity(spec.num_gates());
    for gate in spec.gates() {
        let bools: Vec<bool> = gate
            .range()
            .map(|j| domain.is_positive(sample.inputs[j]))
            .collect();
        outputs.push(eval_gate(gate.kind, &bools)?);
    }
    Ok(outputs)
}

/// Whether flipping this gate's output would flip the top-level output,
/// judged from the other gates' true outputs on the original sample.
fn pivotal(top: GateKind, others_true: usize, others: usize) -> bool {
    match top {
        GateKind::And => others_true == others,
        GateKind::Or => others_true == 0,
        GateKind::Xor => others_true <= 1,
    }
}

/// The gate output implied by a top-level output in a pivotal context.
fn implied_gate_output(top: GateKind, others_true: usize, prediction: u8) -> bool {
    let predicted_true = prediction == 1;
    match top {
        GateKind::And | GateKind::Or => predicted_true,
        // one other gate already true: the top is true exactly when this gate is off
        GateKind::Xor if others_true == 1 => !predicted_true,
        GateKind::Xor => predicted_true,
    }
}

/// Double class assignment per gate. For each gate, pivotal samples (original
/// gate outputs make that gate decide the top level) are grouped by the
/// gate's masked input entries; a key conflicts when the retrained
/// predictions imply both gate outputs for it. When `unique_rmin` is given,
/// only samples with a single minimal reasoning set are considered.
pub fn minimal_dca(
    spec: &FormulaSpec,
    domain: &Domain,
    samples: &[Sample],
    masked: &[MaskedSample],
    retrained_preds: &[u8],
    unique_rmin: Option<&BTreeMap<u64, ReasoningSets>>,
) -> Result<MinimalDcaOutcome> {
    let n = samples.len();
    if masked.len() != n || retrained_preds.len() != n {
        return Err(Error::input("misaligned metric inputs"));
    }
    for i in 0..n {
        if samples[i].inputs.len() != spec.len() || masked[i].entries.len() != spec.len() {
            return Err(Error::input("sample length does not match the formula"));
        }
    }
    let gates = spec.gates();
    let mut per_gate = Vec::with_capacity(gates.len());
    for (g, gate) in gates.iter().enumerate() {
        // key -> which implied gate outputs were seen under it
        let mut keys: BTreeMap<Vec<Option<Value>>, [bool; 2]> = BTreeMap::new();
        for i in 0..n {
            if let Some(map) = unique_rmin {
                let reasoning = map.get(&samples[i].id).ok_or_else(|| {
                    Error::input(format!("no reasoning sets for sample {}", samples[i].id))
                })?;
                if reasoning.r_min.len() != 1 {
                    continue;
                }
            }
            let outputs = gate_outputs(spec, &samples[i], domain)?;
            let others_true = outputs
                .iter()
                .enumerate()
                .filter(|&(k, &v)| k != g && v)
                .count();
            if !pivotal(spec.top_level(), others_true, outputs.len() - 1) {
                continue;
            }
            let implied = implied_gate_output(spec.top_level(), others_true, retrained_preds[i]);
            let key: Vec<Option<Value>> = gate.range().map(|j| masked[i].entries[j]).collect();
            let seen = keys.entry(key).or_insert([false; 2]);
            seen[usize::from(implied)] = true;
        }
        if keys.is_empty() {
            per_gate.push(None);
        } else {
            let conflicting = keys.values().filter(|seen| seen[0] && seen[1]).count();
            per_gate.push(Some(conflicting as f64 / keys.len() as f64 * 100.0));
        }
    }
    let defined: Vec<f64> = per_gate.iter().flatten().copied().collect();
    let aggregate = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(MinimalDcaOutcome { per_gate, aggregate })
}

/// All metrics for one evaluated cell (one method, threshold, fold).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nib_strict: PerClass,
    pub nib_coverage: PerClass,
    pub gib: PerClass,
    pub logical_accuracy: PerClass,
    pub statistical_logical_accuracy: PerClass,
    pub full_dca: Option<FullDcaOutcome>,
    pub minimal_dca: MinimalDcaOutcome,
    pub mask_fraction: PerClass,
    pub retrained_accuracy: PerClass,
    pub logical_acc_diff: f64,
    pub statistical_logical_acc_diff: f64,
}

pub struct MetricsArgs<'a> {
    pub spec: &'a FormulaSpec,
    pub domain: &'a Domain,
    /// Original evaluation samples.
    pub samples: &'a [Sample],
    /// Masked views, aligned with `samples`.
    pub masked: &'a [MaskedSample],
    /// Attribution scores, aligned.
    pub scores: &'a [Vec<f64>],
    /// Ground-truth reasoning sets by sample id.
    pub reasoning: &'a BTreeMap<u64, ReasoningSets>,
    pub base_preds: &'a [u8],
    pub retrained_preds: &'a [u8],
    pub require_unique_rmin: bool,
}

pub fn compute_metrics(args: &MetricsArgs) -> Result<MetricsReport> {
    let n = args.samples.len();
    if n == 0 {
        return Err(Error::input("metrics over an empty evaluation set"));
    }
    if args.masked.len() != n
        || args.scores.len() != n
        || args.base_preds.len() != n
        || args.retrained_preds.len() != n
    {
        return Err(Error::input("misaligned metric inputs"));
    }
    let labels: Vec<u8> = args.samples.iter().map(|s| s.label).collect();

    let mut nib_strict = Vec::with_capacity(n);
    let mut nib_coverage = Vec::with_capacity(n);
    let mut gib = Vec::with_capacity(n);
    let mut logical = Vec::with_capacity(n);
    let mut statistical = Vec::with_capacity(n);
    let mut fraction = Vec::with_capacity(n);
    let mut retrained_ok = Vec::with_capacity(n);
    for i in 0..n {
        let reasoning = args.reasoning.get(&args.samples[i].id).ok_or_else(|| {
            Error::input(format!("no reasoning sets for sample {}", args.samples[i].id))
        })?;
        nib_strict.push(nib_violation(&args.scores[i], reasoning, args.spec, NibVariant::Strict)?);
        nib_coverage.push(nib_violation(&args.scores[i], reasoning, args.spec, NibVariant::Coverage)?);
        gib.push(gib_violation(&args.scores[i], reasoning, args.spec)?);
        logical.push(logical_correct(args.spec, &args.masked[i], args.domain, labels[i])?);
        statistical.push(statistical_correct(args.spec, &args.masked[i], args.domain, labels[i])?);
        fraction.push(args.masked[i].masked_count() as f64 / args.spec.len() as f64 * 100.0);
        retrained_ok.push(args.retrained_preds[i] == labels[i]);
    }

    let logical_accuracy = PerClass::from_flags(&logical, &labels);
    let statistical_logical_accuracy = PerClass::from_flags(&statistical, &labels);
    let retrained_accuracy = PerClass::from_flags(&retrained_ok, &labels);
    let unique_map = args.require_unique_rmin.then_some(args.reasoning);

    Ok(MetricsReport {
        nib_strict: PerClass::from_flags(&nib_strict, &labels),
        nib_coverage: PerClass::from_flags(&nib_coverage, &labels),
        gib: PerClass::from_flags(&gib, &labels),
        logical_accuracy,
        statistical_logical_accuracy,
        full_dca: full_dca(args.masked, &labels, args.base_preds, args.retrained_preds, args.spec)?,
        minimal_dca: minimal_dca(
            args.spec,
            args.domain,
            args.samples,
            args.masked,
            args.retrained_preds,
            unique_map,
        )?,
        mask_fraction: PerClass::from_values(&fraction, &labels),
        retrained_accuracy,
        logical_acc_diff: retrained_accuracy.overall - logical_accuracy.overall,
        statistical_logical_acc_diff: retrained_accuracy.overall - statistical_logical_accuracy.overall,
    })
}
