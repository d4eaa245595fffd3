//! Two-layer logic circuits over a rational alphabet: gate blocks wired to a
//! top-level gate, exhaustive dataset enumeration, and exact evaluation.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::Value;

/// The input alphabet M together with its positive subset T. Values in T
/// count as logical true at a gate input; everything else counts as false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain")]
pub struct Domain {
    values: Vec<Value>,
    positives: Vec<Value>,
}

#[derive(Deserialize)]
struct RawDomain {
    values: Vec<Value>,
    positives: Vec<Value>,
}

impl TryFrom<RawDomain> for Domain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        Domain::new(raw.values, raw.positives)
    }
}

impl Domain {
    pub fn new(values: Vec<Value>, positives: Vec<Value>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::config("alphabet needs at least two values"));
        }
        for (i, v) in values.iter().enumerate() {
            if v.is_zero() {
                return Err(Error::config("0 is reserved as the mask token and cannot be an alphabet value"));
            }
            if values[..i].contains(v) {
                return Err(Error::config(format!("duplicate alphabet value {v}")));
            }
        }
        if positives.is_empty() || positives.len() >= values.len() {
            return Err(Error::config("positive set must be a nonempty proper subset of the alphabet"));
        }
        for (i, p) in positives.iter().enumerate() {
            if !values.contains(p) {
                return Err(Error::config(format!("positive value {p} is not in the alphabet")));
            }
            if positives[..i].contains(p) {
                return Err(Error::config(format!("duplicate positive value {p}")));
            }
        }
        Ok(Domain { values, positives })
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn positives(&self) -> &[Value] {
        &self.positives
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn contains(&self, v: Value) -> bool {
        self.values.contains(&v)
    }

    pub fn is_positive(&self, v: Value) -> bool {
        self.positives.contains(&v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    And,
    Or,
    /// Exactly one true input, not parity.
    Xor,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Xor => "xor",
        })
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(GateKind::And),
            "or" => Ok(GateKind::Or),
            "xor" => Ok(GateKind::Xor),
            other => Err(format!("unknown gate kind '{other}' (expected and, or, xor)")),
        }
    }
}

/// Sizes of one gate block: `stacks` gates of `gate_len` inputs each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub stacks: usize,
    pub gate_len: usize,
}

impl BlockSpec {
    pub fn new(stacks: usize, gate_len: usize) -> Self {
        BlockSpec { stacks, gate_len }
    }

    fn width(&self) -> usize {
        self.stacks * self.gate_len
    }
}

/// One gate instance and the input positions it reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub start: usize,
    pub len: usize,
}

impl Gate {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// The circuit layout: an AND block, an OR block, an XOR block, and a
/// trailing block of baseline inputs wired to nothing, combined by one
/// top-level gate over all gate outputs. Block order is fixed so input
/// columns have the same meaning in every emitted file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFormulaSpec")]
pub struct FormulaSpec {
    and_block: BlockSpec,
    or_block: BlockSpec,
    xor_block: BlockSpec,
    baseline_len: usize,
    top_level: GateKind,
}

#[derive(Deserialize)]
struct RawFormulaSpec {
    and_block: BlockSpec,
    or_block: BlockSpec,
    xor_block: BlockSpec,
    baseline_len: usize,
    top_level: GateKind,
}

impl TryFrom<RawFormulaSpec> for FormulaSpec {
    type Error = Error;

    fn try_from(raw: RawFormulaSpec) -> Result<Self> {
        FormulaSpec::new(raw.and_block, raw.or_block, raw.xor_block, raw.baseline_len, raw.top_level)
    }
}

impl FormulaSpec {
    pub fn new(
        and_block: BlockSpec,
        or_block: BlockSpec,
        xor_block: BlockSpec,
        baseline_len: usize,
        top_level: GateKind,
    ) -> Result<Self> {
        let spec = FormulaSpec { and_block, or_block, xor_block, baseline_len, top_level };
        for (kind, block) in spec.blocks() {
            if block.stacks > 0 && block.gate_len == 0 {
                return Err(Error::config(format!("{kind} block has gates of zero length")));
            }
        }
        if spec.num_gates() == 0 {
            return Err(Error::config("formula needs at least one logic gate"));
        }
        Ok(spec)
    }

    fn blocks(&self) -> [(GateKind, BlockSpec); 3] {
        [
            (GateKind::And, self.and_block),
            (GateKind::Or, self.or_block),
            (GateKind::Xor, self.xor_block),
        ]
    }

    pub fn top_level(&self) -> GateKind {
        self.top_level
    }

    pub fn baseline_len(&self) -> usize {
        self.baseline_len
    }

    /// Total input length l.
    pub fn len(&self) -> usize {
        self.and_block.width() + self.or_block.width() + self.xor_block.width() + self.baseline_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_gates(&self) -> usize {
        self.and_block.stacks + self.or_block.stacks + self.xor_block.stacks
    }

    /// Gates in block order; their ranges partition the non-baseline prefix.
    pub fn gates(&self) -> Vec<Gate> {
        let mut gates = Vec::with_capacity(self.num_gates());
        let mut start = 0;
        for (kind, block) in self.blocks() {
            for _ in 0..block.stacks {
                gates.push(Gate { kind, start, len: block.gate_len });
                start += block.gate_len;
            }
        }
        gates
    }

    /// The trailing positions with no path to the output.
    pub fn baseline_range(&self) -> Range<usize> {
        self.len() - self.baseline_len..self.len()
    }

    pub fn is_baseline(&self, index: usize) -> bool {
        self.baseline_range().contains(&index)
    }

    /// Block label for an input position, for reporting.
    pub fn block_of(&self, index: usize) -> &'static str {
        let mut end = self.and_block.width();
        if index < end {
            return "and";
        }
        end += self.or_block.width();
        if index < end {
            return "or";
        }
        end += self.xor_block.width();
        if index < end {
            return "xor";
        }
        "baseline"
    }
}

pub fn eval_gate(kind: GateKind, inputs: &[bool]) -> Result<bool> {
    if inputs.is_empty() {
        return Err(Error::config("gate evaluated over an empty input list"));
    }
    Ok(match kind {
        GateKind::And => inputs.iter().all(|&b| b),
        GateKind::Or => inputs.iter().any(|&b| b),
        GateKind::Xor => inputs.iter().filter(|&&b| b).count() == 1,
    })
}

/// Evaluates the circuit over already-booleanized inputs.
pub(crate) fn eval_bools(spec: &FormulaSpec, bools: &[bool]) -> Result<bool> {
    let mut gate_outputs = Vec::with_capacity(spec.num_gates());
    for gate in spec.gates() {
        gate_outputs.push(eval_gate(gate.kind, &bools[gate.range()])?);
    }
    eval_gate(spec.top_level(), &gate_outputs)
}

/// Evaluates one input tuple to its class label (1 = top level true).
pub fn eval_sample(spec: &FormulaSpec, inputs: &[Value], domain: &Domain) -> Result<u8> {
    if inputs.len() != spec.len() {
        return Err(Error::input(format!(
            "expected {} inputs, got {}",
            spec.len(),
            inputs.len()
        )));
    }
    let mut bools = Vec::with_capacity(inputs.len());
    for &v in inputs {
        if !domain.contains(v) {
            return Err(Error::input(format!("value {v} is not in the alphabet")));
        }
        bools.push(domain.is_positive(v));
    }
    Ok(eval_bools(spec, &bools)? as u8)
}

/// One labelled input tuple. `id` is its index in the full lexicographic
/// enumeration of M^l, also under sampled generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub id: u64,
    pub inputs: Vec<Value>,
    pub label: u8,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub spec: FormulaSpec,
    pub domain: Domain,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.samples.iter().filter(|s| s.label == 1).count();
        (self.samples.len() - ones, ones)
    }
}

/// |M|^l if it fits in u64.
pub fn enumeration_size(spec: &FormulaSpec, domain: &Domain) -> Option<u64> {
    let mut size: u64 = 1;
    for _ in 0..spec.len() {
        size = size.checked_mul(domain.size() as u64)?;
    }
    Some(size)
}

fn decode_id(mut id: u64, spec: &FormulaSpec, domain: &Domain) -> Vec<Value> {
    let l = spec.len();
    let m = domain.size() as u64;
    let mut inputs = vec![domain.values()[0]; l];
    for pos in (0..l).rev() {
        inputs[pos] = domain.values()[(id % m) as usize];
        id /= m;
    }
    inputs
}

/// Enumerates all of M^l in lexicographic order (position 0 most
/// significant, alphabet order per position), labelling every tuple.
pub fn enumerate_dataset(spec: &FormulaSpec, domain: &Domain, budget: u64) -> Result<Dataset> {
    let size = enumeration_size(spec, domain)
        .filter(|&s| s <= budget)
        .ok_or_else(|| {
            let estimate = enumeration_size(spec, domain)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("{}^{} (overflows u64)", domain.size(), spec.len()));
            Error::budget(format!(
                "enumeration of {estimate} samples exceeds the budget of {budget}; \
                 use sampled generation instead"
            ))
        })?;

    let l = spec.len();
    let mut samples = Vec::with_capacity(size as usize);
    let mut inputs = vec![domain.values()[0]; l];
    let mut digits = vec![0usize; l];
    for id in 0..size {
        let label = eval_sample(spec, &inputs, domain)?;
        samples.push(Sample { id, inputs: inputs.clone(), label });
        for pos in (0..l).rev() {
            digits[pos] += 1;
            if digits[pos] < domain.size() {
                inputs[pos] = domain.values()[digits[pos]];
                break;
            }
            digits[pos] = 0;
            inputs[pos] = domain.values()[0];
        }
    }
    Ok(Dataset { spec: spec.clone(), domain: domain.clone(), samples })
}

/// Draws `n` distinct tuples uniformly from M^l without enumerating it,
/// for alphabets too large to enumerate. Samples come out in id order.
pub fn sample_dataset(spec: &FormulaSpec, domain: &Domain, n: usize, seed: u64) -> Result<Dataset> {
    let size = enumeration_size(spec, domain).ok_or_else(|| {
        Error::budget(format!("{}^{} tuples overflow u64", domain.size(), spec.len()))
    })?;
    if n as u64 > size {
        return Err(Error::input(format!(
            "cannot draw {n} distinct samples from {size} tuples"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = std::collections::BTreeSet::new();
    while ids.len() < n {
        ids.insert(rng.gen_range(0..size));
    }
    let samples = ids
        .into_iter()
        .map(|id| {
            let inputs = decode_id(id, spec, domain);
            let label = eval_sample(spec, &inputs, domain)?;
            Ok(Sample { id, inputs, label })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { spec: spec.clone(), domain: domain.clone(), samples })
}
