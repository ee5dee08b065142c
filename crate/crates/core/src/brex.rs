//! B-ReX: black-box approximation of causal responsibility by recursive
//! partitioning of the input positions.
//!
//! The explainer only sees the classifier through an [`Oracle`]. At each
//! level the current index set is split into blocks. A block is causal when
//! some set of sibling blocks `M` can be masked (set to `Unassigned`) so
//! that two things hold: the label is preserved, and additionally masking
//! the block changes it. The smallest such `M` gives the block
//! responsibility `1/(1 + ctx + |M|)`, where `ctx` counts blocks already
//! masked by ancestor levels. Causal blocks are refined recursively with
//! their witness blocks kept masked.
//!
//! Partitioning samples indices in proportion to the responsibility
//! estimated so far, so positions already known to matter get split apart
//! while irrelevant ones are grouped together. Restarts are independent and
//! their estimates are averaged.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Assignment, Formula, TruthValue};
use crate::ground_truth::next_combination;
use crate::MAX_WIDTH;

/// Classifier output. `Undetermined` only arises on masked inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    False,
    True,
    Undetermined,
}

impl From<TruthValue> for Label {
    fn from(value: TruthValue) -> Self {
        match value {
            TruthValue::False => Label::False,
            TruthValue::True => Label::True,
            TruthValue::Unassigned => Label::Undetermined,
        }
    }
}

impl From<bool> for Label {
    fn from(value: bool) -> Self {
        if value {
            Label::True
        } else {
            Label::False
        }
    }
}

/// A deterministic black-box classifier with a call counter.
pub trait Oracle {
    fn query(&mut self, input: &Assignment) -> Label;

    /// Total number of `query` calls so far.
    fn calls(&self) -> u64;
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn query(&mut self, input: &Assignment) -> Label {
        (**self).query(input)
    }

    fn calls(&self) -> u64 {
        (**self).calls()
    }
}

/// Oracle that evaluates a formula under K3 semantics.
#[derive(Debug, Clone)]
pub struct FormulaOracle<'f> {
    formula: &'f Formula,
    calls: u64,
}

impl<'f> FormulaOracle<'f> {
    pub fn new(formula: &'f Formula) -> Self {
        FormulaOracle { formula, calls: 0 }
    }
}

impl Oracle for FormulaOracle<'_> {
    fn query(&mut self, input: &Assignment) -> Label {
        self.calls += 1;
        self.formula.evaluate_k3(input).into()
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Oracle backed by an arbitrary function.
pub struct FnOracle<F> {
    f: F,
    calls: u64,
}

impl<F: FnMut(&Assignment) -> Label> FnOracle<F> {
    pub fn new(f: F) -> Self {
        FnOracle { f, calls: 0 }
    }
}

impl<F: FnMut(&Assignment) -> Label> Oracle for FnOracle<F> {
    fn query(&mut self, input: &Assignment) -> Label {
        self.calls += 1;
        (self.f)(input)
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrexConfig {
    /// Blocks per partition (at least 2; clamped to the index-set size).
    pub num_blocks: usize,
    /// Independent partitionings whose estimates are averaged.
    pub restarts: usize,
    /// Maximum number of oracle calls, `None` for unlimited.
    pub call_budget: Option<u64>,
    pub seed: u64,
    /// Causal blocks smaller than this are not refined further.
    pub min_block_to_recurse: usize,
    /// Recursion depth limit; `Some(0)` evaluates only the top partition.
    pub max_depth: Option<usize>,
}

impl Default for BrexConfig {
    fn default() -> Self {
        BrexConfig {
            num_blocks: 4,
            restarts: 20,
            call_budget: None,
            seed: 0,
            min_block_to_recurse: 2,
            max_depth: None,
        }
    }
}

impl BrexConfig {
    /// One pass over singleton blocks of a `width`-wide input, no recursion.
    pub fn singleton_blocks(width: usize) -> Self {
        BrexConfig {
            num_blocks: width.max(2),
            restarts: 1,
            max_depth: Some(0),
            ..BrexConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BrexError {
    #[error("the unmasked input has no determinate label")]
    UndeterminedInput,
    #[error("call budget must be positive")]
    ZeroBudget,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("input width {0} exceeds 64")]
    WidthUnsupported(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("cannot partition an empty index set")]
    Empty,
    #[error("need at least two blocks")]
    TooFewBlocks,
}

/// Disjoint, non-empty blocks covering an index set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Self {
        BlockPartition { blocks }
    }

    pub fn singletons(indices: &[usize]) -> Self {
        BlockPartition {
            blocks: indices.iter().map(|&i| vec![i]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True when the blocks are non-empty, pairwise disjoint and cover
    /// exactly `indices`.
    pub fn covers(&self, indices: &[usize]) -> bool {
        let mut all: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        let mut expected = indices.to_vec();
        all.sort_unstable();
        expected.sort_unstable();
        expected.dedup();
        self.blocks.iter().all(|b| !b.is_empty()) && all == expected
    }

    fn masks(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| index_mask(b)).collect()
    }
}

fn index_mask(indices: &[usize]) -> u64 {
    indices
        .iter()
        .filter(|&&i| i < MAX_WIDTH)
        .fold(0, |acc, &i| acc | 1 << i)
}

/// Approximate responsibility per input position, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsibilityEstimate(Vec<f64>);

impl ResponsibilityEstimate {
    pub fn new(values: Vec<f64>) -> Self {
        ResponsibilityEstimate(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub estimate: ResponsibilityEstimate,
    /// Oracle calls made by this explanation, including the unmasked input.
    pub oracle_calls: u64,
    pub restarts_completed: usize,
    pub budget_exhausted: bool,
}

/// Splits `indices` into at most `m` blocks of roughly equal weight.
///
/// Weights are `|weights[i]|` normalised over `indices` (uniform when they
/// sum to zero). Indices are drawn without replacement in proportion to
/// weight and added to the current block until its weight reaches `1/m`;
/// the last block takes whatever remains. An index set of two or more is
/// always split into at least two blocks.
pub fn partition<R: Rng + ?Sized>(
    indices: &[usize],
    weights: &[f64],
    m: usize,
    rng: &mut R,
) -> Result<BlockPartition, PartitionError> {
    if indices.is_empty() {
        return Err(PartitionError::Empty);
    }
    if m < 2 {
        return Err(PartitionError::TooFewBlocks);
    }
    let m = m.min(indices.len());
    let raw: Vec<f64> = indices
        .iter()
        .map(|&i| match weights.get(i) {
            Some(w) if w.is_finite() => w.abs(),
            _ => 0.0,
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let mut remaining: Vec<(usize, f64)> = if total > 0.0 {
        indices.iter().zip(&raw).map(|(&i, &w)| (i, w / total)).collect()
    } else {
        let w = 1.0 / indices.len() as f64;
        indices.iter().map(|&i| (i, w)).collect()
    };

    let threshold = 1.0 / m as f64 - 1e-12;
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new()];
    let mut cumulative = 0.0;
    while !remaining.is_empty() {
        let pos = weighted_pick(&remaining, rng);
        let (index, weight) = remaining.remove(pos);
        blocks.last_mut().unwrap().push(index);
        cumulative += weight;
        if cumulative >= threshold && blocks.len() < m && !remaining.is_empty() {
            blocks.push(Vec::new());
            cumulative = 0.0;
        }
    }
    if blocks.len() == 1 && blocks[0].len() >= 2 {
        let last = blocks[0].pop().unwrap();
        blocks.push(vec![last]);
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    Ok(BlockPartition { blocks })
}

fn weighted_pick<R: Rng + ?Sized>(items: &[(usize, f64)], rng: &mut R) -> usize {
    let total: f64 = items.iter().map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return rng.gen_range(0..items.len());
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (pos, &(_, w)) in items.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last_positive = pos;
        if target < acc {
            return pos;
        }
    }
    last_positive
}

struct Exhausted;

/// Memoising, budgeted view of an oracle for one fixed input `x`. Queries
/// are keyed by the set of kept positions.
struct Probe<'a, O: ?Sized> {
    oracle: &'a mut O,
    x: &'a Assignment,
    cache: BTreeMap<u64, Label>,
    budget: Option<u64>,
    used: u64,
}

impl<'a, O: Oracle + ?Sized> Probe<'a, O> {
    fn new(oracle: &'a mut O, x: &'a Assignment, budget: Option<u64>) -> Self {
        Probe {
            oracle,
            x,
            cache: BTreeMap::new(),
            budget,
            used: 0,
        }
    }

    fn label(&mut self, keep: u64) -> Result<Label, Exhausted> {
        if let Some(&label) = self.cache.get(&keep) {
            return Ok(label);
        }
        if self.budget.is_some_and(|b| self.used >= b) {
            return Err(Exhausted);
        }
        self.used += 1;
        let label = self.oracle.query(&self.x.mask_bits(keep));
        self.cache.insert(keep, label);
        Ok(label)
    }
}

/// Smallest set of sibling blocks (by count, then lexicographic block
/// order) whose masking preserves `reference` while also masking `target`
/// changes it.
fn search_witness<O: Oracle + ?Sized>(
    probe: &mut Probe<'_, O>,
    block_masks: &[u64],
    target: usize,
    base_keep: u64,
    reference: Label,
) -> Result<Option<Vec<usize>>, Exhausted> {
    let others: Vec<usize> = (0..block_masks.len()).filter(|&b| b != target).collect();
    let all_blocks = block_masks.iter().fold(0, |acc, m| acc | m);
    for size in 0..=others.len() {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let masked = combo.iter().fold(0, |acc, &c| acc | block_masks[others[c]]);
            let keep = base_keep | (all_blocks & !masked);
            if probe.label(keep)? == reference
                && probe.label(keep & !block_masks[target])? != reference
            {
                return Ok(Some(combo.iter().map(|&c| others[c]).collect()));
            }
            if !next_combination(&mut combo, others.len()) {
                break;
            }
        }
    }
    Ok(None)
}

/// Witness search for one block, exposed for direct use. Positions that are
/// neither in `outside_keep` nor in any block stay masked throughout.
/// Returns the indices (into `blocks`) of the smallest witness, or `None`
/// if `target` is not causal.
pub fn find_witness_blocks<O: Oracle + ?Sized>(
    oracle: &mut O,
    x: &Assignment,
    blocks: &BlockPartition,
    target: usize,
    outside_keep: &[usize],
) -> Option<Vec<usize>> {
    let mut probe = Probe::new(oracle, x, None);
    let reference = probe.label(full_mask(x.width())).ok()?;
    search_witness(
        &mut probe,
        &blocks.masks(),
        target,
        index_mask(outside_keep),
        reference,
    )
    .ok()
    .flatten()
}

fn full_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Derives an independent seed for stream `stream` of `seed` (SplitMix64).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Run<'p, 'a, O: ?Sized> {
    probe: &'p mut Probe<'a, O>,
    config: &'p BrexConfig,
    reference: Label,
    width: usize,
}

impl<O: Oracle + ?Sized> Run<'_, '_, O> {
    fn refine(
        &mut self,
        indices: &[usize],
        context_mask: u64,
        ctx: usize,
        depth: usize,
        rho: &mut [f64],
        rng: &mut ChaCha8Rng,
    ) -> Result<(), Exhausted> {
        let blocks = partition(indices, rho, self.config.num_blocks, rng)
            .expect("non-empty index set and at least two blocks");
        let masks = blocks.masks();
        let here = index_mask(indices);
        let outside_keep = full_mask(self.width) & !context_mask & !here;

        let mut witnesses = Vec::with_capacity(blocks.len());
        for target in 0..blocks.len() {
            witnesses.push(search_witness(
                self.probe,
                &masks,
                target,
                outside_keep,
                self.reference,
            )?);
        }
        for (block, witness) in blocks.blocks().iter().zip(&witnesses) {
            let value = witness
                .as_ref()
                .map_or(0.0, |m| 1.0 / (1 + ctx + m.len()) as f64);
            for &i in block {
                rho[i] = value;
            }
        }

        if self.config.max_depth.is_some_and(|d| depth >= d) {
            return Ok(());
        }
        let min_size = self.config.min_block_to_recurse.max(2);
        for (block, witness) in blocks.blocks().iter().zip(&witnesses) {
            let Some(witness) = witness else { continue };
            if block.len() < min_size {
                continue;
            }
            let masked = witness.iter().fold(context_mask, |acc, &b| acc | masks[b]);
            self.refine(block, masked, ctx + witness.len(), depth + 1, rho, rng)?;
        }
        Ok(())
    }
}

/// Approximate responsibility map of `x` from oracle calls only.
pub fn brex_explain<O: Oracle + ?Sized>(
    oracle: &mut O,
    x: &Assignment,
    config: &BrexConfig,
) -> Result<Explanation, BrexError> {
    let width = x.width();
    if width > MAX_WIDTH {
        return Err(BrexError::WidthUnsupported(width));
    }
    if config.num_blocks < 2 {
        return Err(BrexError::InvalidConfig("num_blocks must be at least 2"));
    }
    if config.restarts == 0 {
        return Err(BrexError::InvalidConfig("restarts must be at least 1"));
    }
    if config.call_budget == Some(0) {
        return Err(BrexError::ZeroBudget);
    }
    let mut probe = Probe::new(oracle, x, config.call_budget);
    let reference = match probe.label(full_mask(width)) {
        Ok(Label::Undetermined) => return Err(BrexError::UndeterminedInput),
        Ok(label) => label,
        Err(Exhausted) => unreachable!("budget is positive"),
    };

    let all: Vec<usize> = (0..width).collect();
    let mut total = vec![0.0; width];
    let mut completed = 0usize;
    let mut partial = None;
    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, restart as u64));
        let mut rho = vec![0.0; width];
        let mut run = Run {
            probe: &mut probe,
            config,
            reference,
            width,
        };
        if width == 0 {
            completed += 1;
            continue;
        }
        let outcome = if width == 1 {
            // A single position cannot be split; test it directly.
            let masks = [1u64];
            search_witness(run.probe, &masks, 0, 0, reference).map(|w| {
                rho[0] = if w.is_some() { 1.0 } else { 0.0 };
            })
        } else {
            run.refine(&all, 0, 0, 0, &mut rho, &mut rng)
        };
        match outcome {
            Ok(()) => {
                for (t, r) in total.iter_mut().zip(&rho) {
                    *t += r;
                }
                completed += 1;
            }
            Err(Exhausted) => {
                partial = Some(rho);
                break;
            }
        }
    }

    let budget_exhausted = partial.is_some();
    let estimate = if completed > 0 {
        total.iter().map(|t| t / completed as f64).collect()
    } else {
        partial.unwrap_or_else(|| vec![0.0; width])
    };
    Ok(Explanation {
        estimate: ResponsibilityEstimate(estimate),
        oracle_calls: probe.used,
        restarts_completed: completed,
        budget_exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn explain(f: &str, x: &str, config: &BrexConfig) -> Vec<f64> {
        let f = parse(f).unwrap();
        let mut oracle = FormulaOracle::new(&f);
        brex_explain(&mut oracle, &a(x), config)
            .unwrap()
            .estimate
            .into_vec()
    }

    #[test]
    fn single_relevant_variable() {
        for b in [2, 3, 4, 8] {
            let config = BrexConfig {
                num_blocks: b,
                restarts: 3,
                seed: 11,
                ..BrexConfig::default()
            };
            let rho = explain("x3", "00100000", &config);
            let mut expected = vec![0.0; 8];
            expected[2] = 1.0;
            assert_eq!(rho, expected, "b = {b}");
        }
    }

    #[test]
    fn singleton_conjunction() {
        let rho = explain("x1 & x2", "110000", &BrexConfig::singleton_blocks(6));
        assert_eq!(rho, [1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn singleton_nested_conjunction_matches_ground_truth() {
        let rho = explain("x1 & (x2 & x3)", "000000", &BrexConfig::singleton_blocks(6));
        let third = 1.0 / 3.0;
        assert_eq!(rho, [third, third, third, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn witness_block_examples() {
        let f = parse("x1 | x2").unwrap();
        let blocks = BlockPartition::singletons(&[0, 1]);
        let mut oracle = FormulaOracle::new(&f);
        assert_eq!(
            find_witness_blocks(&mut oracle, &a("11"), &blocks, 0, &[]),
            Some(vec![1])
        );
        let g = parse("x1 & x2").unwrap();
        let mut oracle = FormulaOracle::new(&g);
        assert_eq!(
            find_witness_blocks(&mut oracle, &a("11"), &blocks, 0, &[]),
            Some(vec![])
        );
        let blocks3 = BlockPartition::singletons(&[0, 1, 2]);
        assert_eq!(
            find_witness_blocks(&mut oracle, &a("110"), &blocks3, 2, &[]),
            None
        );
    }

    #[test]
    fn outside_keep_is_respected() {
        // x1 | x2 with x2 kept outside the partition: x1 can never be decisive.
        let f = parse("x1 | x2").unwrap();
        let blocks = BlockPartition::singletons(&[0]);
        let mut oracle = FormulaOracle::new(&f);
        assert_eq!(
            find_witness_blocks(&mut oracle, &a("11"), &blocks, 0, &[1]),
            None
        );
        // With x2 masked (not kept, not partitioned) x1 is decisive.
        assert_eq!(
            find_witness_blocks(&mut oracle, &a("11"), &blocks, 0, &[]),
            Some(vec![])
        );
    }

    #[test]
    fn partition_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let idx: Vec<usize> = (0..8).collect();
        let p = partition(&idx, &[], 4, &mut rng).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.blocks().iter().all(|b| b.len() == 2));
        assert!(p.covers(&idx));

        let mut weights = vec![0.0; 8];
        weights[5] = 3.0;
        let p = partition(&idx, &weights, 2, &mut rng).unwrap();
        assert_eq!(p.blocks()[0], vec![5]);
        assert!(p.covers(&idx));

        let p = partition(&[7], &[], 4, &mut rng).unwrap();
        assert_eq!(p.blocks(), &[vec![7]]);

        assert_eq!(partition(&[], &[], 4, &mut rng), Err(PartitionError::Empty));
        assert_eq!(partition(&idx, &[], 1, &mut rng), Err(PartitionError::TooFewBlocks));
    }

    #[test]
    fn partition_never_returns_one_block_for_two_or_more() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Threshold only reached by the final heavy item.
        let weights = [0.1, 0.1, 0.8];
        for _ in 0..50 {
            let p = partition(&[0, 1, 2], &weights, 2, &mut rng).unwrap();
            assert!(p.len() >= 2);
            assert!(p.covers(&[0, 1, 2]));
        }
    }

    #[test]
    fn budget_is_respected() {
        let f = parse("(x1 | x2) & (x3 ^ !x4) & (x5 | x6 & x7)").unwrap();
        for budget in [1, 2, 5, 17, 40] {
            let mut oracle = FormulaOracle::new(&f);
            let config = BrexConfig {
                call_budget: Some(budget),
                seed: 3,
                ..BrexConfig::default()
            };
            let out = brex_explain(&mut oracle, &a("1101101000"), &config).unwrap();
            assert!(oracle.calls() <= budget);
            assert_eq!(out.oracle_calls, oracle.calls());
            assert!(out.estimate.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn errors() {
        let f = parse("x1 & x2").unwrap();
        let mut oracle = FormulaOracle::new(&f);
        assert_eq!(
            brex_explain(&mut oracle, &a("1U"), &BrexConfig::default()),
            Err(BrexError::UndeterminedInput)
        );
        let zero = BrexConfig {
            call_budget: Some(0),
            ..BrexConfig::default()
        };
        assert_eq!(
            brex_explain(&mut oracle, &a("11"), &zero),
            Err(BrexError::ZeroBudget)
        );
    }

    #[test]
    fn seeded_runs_are_identical() {
        let f = parse("(x1 ^ x2) & (x3 | !x5) | x7 & x8").unwrap();
        let config = BrexConfig {
            seed: 99,
            ..BrexConfig::default()
        };
        let x = a("101101110000");
        assert_eq!(explain(&crate::formula::render(&f), &x.to_bitstring(), &config),
                   explain(&crate::formula::render(&f), &x.to_bitstring(), &config));
    }
}
