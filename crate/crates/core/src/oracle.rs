//! Ground-truth reasoning sets per sample: every minimum-cardinality
//! sufficient input subset, the union of relevant inputs, and deterministic
//! oracle scores built from them. A subset is sufficient when the label is
//! constant over every completion of the remaining positions.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{eval_sample, Domain, FormulaSpec, GateKind, Sample};
use crate::value::Value;

/// Reasoning ground truth for one sample. `r_min` members are sorted
/// ascending and listed in lexicographic order; `relevant` is their union.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningSets {
    pub sample_id: u64,
    pub r_min: Vec<Vec<usize>>,
    pub relevant: Vec<usize>,
}

impl ReasoningSets {
    fn from_family(sample_id: u64, family: BTreeSet<Vec<usize>>) -> Self {
        let relevant: BTreeSet<usize> = family.iter().flatten().copied().collect();
        ReasoningSets {
            sample_id,
            r_min: family.into_iter().collect(),
            relevant: relevant.into_iter().collect(),
        }
    }

    pub fn min_cardinality(&self) -> usize {
        self.r_min.first().map(Vec::len).unwrap_or(0)
    }
}

/// Size limits for the exponential brute-force search.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_len: usize,
    pub max_alphabet: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_len: 12, max_alphabet: 4 }
    }
}

/// True iff every completion of the positions outside `subset` keeps the
/// label at `sample.label`.
pub fn is_sufficient(
    spec: &FormulaSpec,
    sample: &Sample,
    domain: &Domain,
    subset: &[usize],
) -> Result<bool> {
    let l = spec.len();
    for &i in subset {
        if i >= l {
            return Err(Error::input(format!("subset index {i} out of range for length {l}")));
        }
    }
    let keep: BTreeSet<usize> = subset.iter().copied().collect();
    let free: Vec<usize> = (0..l).filter(|i| !keep.contains(i)).collect();
    let mut scratch = sample.inputs.clone();
    label_constant(spec, domain, sample.label, &free, &mut scratch)
}

/// Odometer over the free positions with early exit on the first
/// counter-label completion. The first free position varies fastest so
/// informative flips happen early.
fn label_constant(
    spec: &FormulaSpec,
    domain: &Domain,
    label: u8,
    free: &[usize],
    scratch: &mut [Value],
) -> Result<bool> {
    for &pos in free {
        scratch[pos] = domain.values()[0];
    }
    let mut digits = vec![0usize; free.len()];
    loop {
        if eval_sample(spec, scratch, domain)? != label {
            return Ok(false);
        }
        let mut slot = 0;
        loop {
            if slot == free.len() {
                return Ok(true);
            }
            digits[slot] += 1;
            if digits[slot] < domain.size() {
                scratch[free[slot]] = domain.values()[digits[slot]];
                break;
            }
            digits[slot] = 0;
            scratch[free[slot]] = domain.values()[0];
            slot += 1;
        }
    }
}

/// Exhaustive search for all minimum-cardinality sufficient subsets:
/// subsets are enumerated in ascending cardinality and the search stops
/// after the first cardinality level that contains sufficient ones.
pub fn brute_force_r_min(
    spec: &FormulaSpec,
    sample: &Sample,
    domain: &Domain,
    budget: &OracleBudget,
) -> Result<ReasoningSets> {
    let l = spec.len();
    if l > budget.max_len || domain.size() > budget.max_alphabet {
        return Err(Error::budget(format!(
            "brute-force search over {l} inputs / alphabet {} exceeds the budget \
             ({} inputs, alphabet {})",
            domain.size(),
            budget.max_len,
            budget.max_alphabet
        )));
    }
    let mut scratch = sample.inputs.clone();
    for cardinality in 0..=l {
        let mut found = BTreeSet::new();
        for subset in (0..l).combinations(cardinality) {
            let free: Vec<usize> = (0..l).filter(|i| !subset.contains(i)).collect();
            scratch.copy_from_slice(&sample.inputs);
            if label_constant(spec, domain, sample.label, &free, &mut scratch)? {
                found.insert(subset);
            }
        }
        if !found.is_empty() {
            return Ok(ReasoningSets::from_family(sample.id, found));
        }
    }
    unreachable!("the full index set is always sufficient");
}

/// Every minimum subset of positions that alone forces the gate's output
/// given the full truth assignment. Positions are local to the gate.
fn certificate_family(kind: GateKind, bools: &[bool]) -> Vec<Vec<usize>> {
    let all = || vec![(0..bools.len()).collect::<Vec<_>>()];
    let positions_where = |wanted: bool| {
        bools
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == wanted)
            .map(|(i, _)| vec![i])
            .collect::<Vec<_>>()
    };
    match kind {
        GateKind::And => {
            if bools.iter().all(|&b| b) {
                all()
            } else {
                positions_where(false)
            }
        }
        GateKind::Or => {
            if bools.iter().any(|&b| b) {
                positions_where(true)
            } else {
                all()
            }
        }
        GateKind::Xor => {
            let positives: Vec<usize> = bools
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i)
                .collect();
            match positives.len() {
                1 => all(),
                0 => all(),
                _ => positives
                    .iter()
                    .tuple_combinations()
                    .map(|(&a, &b)| vec![a, b])
                    .collect(),
            }
        }
    }
}

/// Composes per-gate certificates with top-level gate-output certificates
/// and keeps the minimum-cardinality unions. Gates read disjoint inputs, so
/// a union's cardinality is the sum of its per-gate certificate sizes.
pub fn structural_r_min(spec: &FormulaSpec, sample: &Sample, domain: &Domain) -> Result<ReasoningSets> {
    if sample.inputs.len() != spec.len() {
        return Err(Error::input(format!(
            "expected {} inputs, got {}",
            spec.len(),
            sample.inputs.len()
        )));
    }
    let bools: Vec<bool> = sample.inputs.iter().map(|&v| domain.is_positive(v)).collect();
    let gates = spec.gates();
    let gate_values: Vec<bool> = gates
        .iter()
        .map(|g| crate::logic::eval_gate(g.kind, &bools[g.range()]))
        .collect::<Result<_>>()?;

    // absolute-index certificate families, one per gate; every family is
    // uniform in cardinality
    let gate_families: Vec<Vec<Vec<usize>>> = gates
        .iter()
        .map(|g| {
            certificate_family(g.kind, &bools[g.range()])
                .into_iter()
                .map(|cert| cert.into_iter().map(|i| i + g.start).collect())
                .collect()
        })
        .collect();
    let gate_cost: Vec<usize> = gate_families.iter().map(|f| f[0].len()).collect();

    // each top-level certificate names the gates whose outputs must be fixed
    let top_family = certificate_family(spec.top_level(), &gate_values);
    let costs: Vec<usize> = top_family
        .iter()
        .map(|gates_needed| gates_needed.iter().map(|&g| gate_cost[g]).sum())
        .collect();
    let min_cost = *costs.iter().min().expect("top family is never empty");

    let mut family = BTreeSet::new();
    for (gates_needed, cost) in top_family.iter().zip(&costs) {
        if *cost != min_cost {
            continue;
        }
        // cross product of the needed gates' certificate families; gate
        // ranges ascend, so concatenation keeps indices sorted
        let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
        for &g in gates_needed {
            let mut next = Vec::with_capacity(acc.len() * gate_families[g].len());
            for base in &acc {
                for cert in &gate_families[g] {
                    let mut combined = base.clone();
                    combined.extend_from_slice(cert);
                    next.push(combined);
                }
            }
            acc = next;
        }
        family.extend(acc);
    }
    Ok(ReasoningSets::from_family(sample.id, family))
}

/// Deterministic ground-truth scores: the lexicographically first minimum
/// set scores 1.0, the other relevant inputs 0.5, everything else 0.0.
pub fn oracle_scores(spec: &FormulaSpec, reasoning: &ReasoningSets) -> Vec<f64> {
    let mut scores = vec![0.0; spec.len()];
    for &i in &reasoning.relevant {
        scores[i] = 0.5;
    }
    if let Some(first) = reasoning.r_min.first() {
        for &i in first {
            scores[i] = 1.0;
        }
    }
    scores
}
