//! Randomized checks of the invariants the pipeline relies on: gate
//! semantics, enumeration shape, three-valued refinement, mask behavior,
//! blindness-metric orderings, and split/balance bookkeeping.

use std::collections::BTreeSet;

use proptest::prelude::*;

use attest_core::logic::{
    enumerate_dataset, eval_gate, eval_sample, sample_dataset, BlockSpec, Domain, FormulaSpec,
    GateKind, Sample,
};
use attest_core::mask::{compute_mask, masked_numeric, ThresholdRule};
use attest_core::masked::{class_prob_exact, tri_eval, MaskedSample, Prob, TriValue};
use attest_core::metrics::{
    gib_violation, logical_correct, nib_violation, statistical_correct, NibVariant,
};
use attest_core::oracle::{brute_force_r_min, oracle_scores, structural_r_min, OracleBudget};
use attest_core::train::{
    fold_partition, oversample_balance, split_dataset, SplitMode, TrainConfig,
};
use attest_core::Value;

fn frac(numer: i64, denom: i64) -> Value {
    Value::new(numer, denom)
}

fn arb_domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        Just(Domain::new(vec![frac(-1, 1), frac(1, 1)], vec![frac(1, 1)]).unwrap()),
        Just(
            Domain::new(
                vec![frac(-1, 1), frac(-1, 3), frac(1, 3), frac(1, 1)],
                vec![frac(-1, 3), frac(1, 1)],
            )
            .unwrap()
        ),
        Just(
            Domain::new(vec![frac(-1, 1), frac(1, 2), frac(1, 1)], vec![frac(1, 1)]).unwrap()
        ),
    ]
}

fn arb_top() -> impl Strategy<Value = GateKind> {
    prop_oneof![Just(GateKind::And), Just(GateKind::Or), Just(GateKind::Xor)]
}

/// Random circuit layouts with at least one gate, at least one baseline
/// input, and few enough inputs to keep exhaustive checks cheap.
fn arb_spec() -> impl Strategy<Value = FormulaSpec> {
    let block = (0usize..=2, 1usize..=3).prop_map(|(stacks, gate_len)| BlockSpec::new(stacks, gate_len));
    (block.clone(), block.clone(), block, 1usize..=2, arb_top()).prop_filter_map(
        "needs a gate and a small input count",
        |(and, or, xor, baseline, top)| {
            FormulaSpec::new(and, or, xor, baseline, top)
                .ok()
                .filter(|spec| spec.len() <= 8)
        },
    )
}

/// A spec, a domain, and one concrete labeled sample drawn from them.
fn arb_case() -> impl Strategy<Value = (FormulaSpec, Domain, Sample)> {
    (arb_spec(), arb_domain()).prop_flat_map(|(spec, domain)| {
        let picks = proptest::collection::vec(0..domain.size(), spec.len());
        picks.prop_map(move |indices| {
            let inputs: Vec<Value> = indices.iter().map(|&i| domain.values()[i]).collect();
            let label = eval_sample(&spec, &inputs, &domain).unwrap();
            (spec.clone(), domain.clone(), Sample { id: 0, inputs, label })
        })
    })
}

fn arb_masked_case() -> impl Strategy<Value = (FormulaSpec, Domain, Sample, Vec<bool>)> {
    arb_case().prop_flat_map(|(spec, domain, sample)| {
        let mask = proptest::collection::vec(any::<bool>(), spec.len());
        mask.prop_map(move |m| (spec.clone(), domain.clone(), sample.clone(), m))
    })
}

fn arb_scored_case() -> impl Strategy<Value = (FormulaSpec, Domain, Sample, Vec<f64>)> {
    arb_case().prop_flat_map(|(spec, domain, sample)| {
        let scores = proptest::collection::vec(-1.0f64..1.0, spec.len());
        scores.prop_map(move |s| (spec.clone(), domain.clone(), sample.clone(), s))
    })
}

proptest! {
    #[test]
    fn xor_gate_fires_on_exactly_one_true_input(bits in proptest::collection::vec(any::<bool>(), 1..8)) {
        let expected = bits.iter().filter(|&&b| b).count() == 1;
        prop_assert_eq!(eval_gate(GateKind::Xor, &bits).unwrap(), expected);
    }

    #[test]
    fn enumeration_is_the_full_input_space((spec, domain) in (arb_spec(), arb_domain())) {
        prop_assume!(domain.size().pow(spec.len() as u32) <= 1 << 14);
        let data = enumerate_dataset(&spec, &domain, 1 << 14).unwrap();
        prop_assert_eq!(data.samples.len(), domain.size().pow(spec.len() as u32));
        let mut inputs_seen = BTreeSet::new();
        for (i, s) in data.samples.iter().enumerate() {
            prop_assert_eq!(s.id, i as u64);
            prop_assert_eq!(s.label, eval_sample(&spec, &s.inputs, &domain).unwrap());
            inputs_seen.insert(s.inputs.clone());
        }
        prop_assert_eq!(inputs_seen.len(), data.samples.len());
    }

    #[test]
    fn sampling_draws_distinct_rows_of_the_enumeration(
        (spec, domain) in (arb_spec(), arb_domain()),
        n in 1usize..64,
        seed in any::<u64>(),
    ) {
        let total = domain.size().pow(spec.len() as u32);
        prop_assume!(total <= 1 << 14);
        let n = n.min(total);
        let full = enumerate_dataset(&spec, &domain, 1 << 14).unwrap();
        let drawn = sample_dataset(&spec, &domain, n, seed).unwrap();
        prop_assert_eq!(drawn.samples.len(), n);
        let ids: BTreeSet<u64> = drawn.samples.iter().map(|s| s.id).collect();
        prop_assert_eq!(ids.len(), n);
        for s in &drawn.samples {
            prop_assert_eq!(&full.samples[s.id as usize].inputs, &s.inputs);
            prop_assert_eq!(full.samples[s.id as usize].label, s.label);
        }
    }

    #[test]
    fn unmasked_evaluation_is_already_determined((spec, domain, sample) in arb_case()) {
        let masked = MaskedSample::from_inputs(&sample.inputs, &vec![false; spec.len()]);
        let tri = tri_eval(&spec, &masked, &domain).unwrap();
        let expected = if sample.label == 1 { TriValue::True } else { TriValue::False };
        prop_assert_eq!(tri, expected);
        let p = class_prob_exact(&spec, &masked, &domain).unwrap();
        prop_assert_eq!(p, Prob::from_integer(i128::from(sample.label)));
    }

    #[test]
    fn masking_more_keeps_any_determined_value(
        (spec, domain, sample, mask) in arb_masked_case(),
        extra in proptest::collection::vec(any::<bool>(), 0..8),
    ) {
        let wider: Vec<bool> = mask
            .iter()
            .enumerate()
            .map(|(i, &m)| m || extra.get(i).copied().unwrap_or(false))
            .collect();
        let narrow = MaskedSample::from_inputs(&sample.inputs, &mask);
        let wide = MaskedSample::from_inputs(&sample.inputs, &wider);
        let wide_tri = tri_eval(&spec, &wide, &domain).unwrap();
        if wide_tri != TriValue::Unknown {
            prop_assert_eq!(tri_eval(&spec, &narrow, &domain).unwrap(), wide_tri);
        }
    }

    #[test]
    fn class_probability_stays_a_probability((spec, domain, sample, mask) in arb_masked_case()) {
        let masked = MaskedSample::from_inputs(&sample.inputs, &mask);
        let p = class_prob_exact(&spec, &masked, &domain).unwrap();
        prop_assert!(p >= Prob::from_integer(0) && p <= Prob::from_integer(1));
    }

    #[test]
    fn statistical_reading_dominates_the_logical_one((spec, domain, sample, mask) in arb_masked_case()) {
        let masked = MaskedSample::from_inputs(&sample.inputs, &mask);
        if logical_correct(&spec, &masked, &domain, sample.label).unwrap() {
            prop_assert!(statistical_correct(&spec, &masked, &domain, sample.label).unwrap());
        }
    }

    #[test]
    fn baseline_max_swallows_the_whole_baseline_block((spec, _domain, _sample, scores) in arb_scored_case()) {
        let plan = compute_mask(&scores, ThresholdRule::BaselineMax, &spec).unwrap();
        prop_assert_eq!(plan.mask.len(), spec.len());
        for j in spec.baseline_range() {
            prop_assert!(plan.mask[j], "baseline input {} survived", j);
        }
        prop_assert!(plan.masked_count() >= spec.baseline_len());
    }

    #[test]
    fn zero_token_appears_exactly_at_masked_positions((_spec, _domain, sample, mask) in arb_masked_case()) {
        let numeric = masked_numeric(&sample.inputs, &mask);
        for (i, &x) in numeric.iter().enumerate() {
            prop_assert_eq!(x == 0.0, mask[i]);
        }
    }

    #[test]
    fn blindness_violations_are_ordered((spec, domain, sample, scores) in arb_scored_case()) {
        let sets = structural_r_min(&spec, &sample, &domain).unwrap();
        let coverage = nib_violation(&scores, &sets, &spec, NibVariant::Coverage).unwrap();
        let strict = nib_violation(&scores, &sets, &spec, NibVariant::Strict).unwrap();
        let general = gib_violation(&scores, &sets, &spec).unwrap();
        if coverage {
            prop_assert!(strict, "a violation in every minimal set implies one in some set");
        }
        if strict {
            prop_assert!(general, "minimal sets are made of relevant inputs");
        }
    }

    #[test]
    fn ground_truth_scores_stay_blind((spec, domain, sample) in arb_case()) {
        let sets = structural_r_min(&spec, &sample, &domain).unwrap();
        let scores = oracle_scores(&spec, &sets);
        prop_assert!(!nib_violation(&scores, &sets, &spec, NibVariant::Strict).unwrap());
        prop_assert!(!gib_violation(&scores, &sets, &spec).unwrap());
    }

    #[test]
    fn structural_search_agrees_with_brute_force((spec, domain, sample) in arb_case()) {
        let structural = structural_r_min(&spec, &sample, &domain).unwrap();
        let brute = brute_force_r_min(&spec, &sample, &domain, &OracleBudget::default()).unwrap();
        let family = |sets: &[Vec<usize>]| -> BTreeSet<BTreeSet<usize>> {
            sets.iter().map(|s| s.iter().copied().collect()).collect()
        };
        prop_assert_eq!(family(&structural.r_min), family(&brute.r_min));
        let relevant: BTreeSet<usize> = structural.relevant.iter().copied().collect();
        let brute_relevant: BTreeSet<usize> = brute.relevant.iter().copied().collect();
        prop_assert_eq!(relevant, brute_relevant);
    }

    #[test]
    fn oversampling_balances_without_touching_originals(
        (spec, domain) in (arb_spec(), arb_domain()),
        seed in any::<u64>(),
    ) {
        prop_assume!(domain.size().pow(spec.len() as u32) <= 1 << 12);
        let data = enumerate_dataset(&spec, &domain, 1 << 12).unwrap();
        let ones = data.samples.iter().filter(|s| s.label == 1).count();
        prop_assume!(ones > 0 && ones < data.samples.len());
        let balanced = oversample_balance(&data.samples, seed).unwrap();
        let balanced_ones = balanced.iter().filter(|s| s.label == 1).count();
        prop_assert_eq!(balanced_ones * 2, balanced.len());
        prop_assert_eq!(&balanced[..data.samples.len()], &data.samples[..]);
        let known: BTreeSet<u64> = data.samples.iter().map(|s| s.id).collect();
        for extra in &balanced[data.samples.len()..] {
            prop_assert!(known.contains(&extra.id));
        }
    }

    #[test]
    fn splitting_keeps_every_sample_exactly_once(
        (spec, domain) in (arb_spec(), arb_domain()),
        ratio in 0.5f64..0.95,
        seed in any::<u64>(),
    ) {
        prop_assume!(domain.size().pow(spec.len() as u32) <= 1 << 12);
        let data = enumerate_dataset(&spec, &domain, 1 << 12).unwrap();
        let (train, test) = split_dataset(&data.samples, SplitMode::Split { ratio }, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), data.samples.len());
        let mut ids: Vec<u64> = train.iter().chain(&test).map(|s| s.id).collect();
        ids.sort_unstable();
        let expected: Vec<u64> = (0..data.samples.len() as u64).collect();
        prop_assert_eq!(ids, expected);
    }

    #[test]
    fn folds_partition_every_training_index(
        labels in proptest::collection::vec(0u8..2, 10..60),
        folds in 2usize..6,
        seed in any::<u64>(),
    ) {
        let cfg = TrainConfig { folds, seed, ..TrainConfig::default() };
        let buckets = fold_partition(&cfg, &labels).unwrap();
        prop_assert_eq!(buckets.len(), folds);
        let mut seen: Vec<usize> = buckets.iter().flatten().copied().collect();
        seen.sort_unstable();
        let expected: Vec<usize> = (0..labels.len()).collect();
        prop_assert_eq!(seen, expected);
    }
}
