//! Shapley-value and random baselines over the same masking interface that
//! B-ReX uses.
//!
//! Players are input positions. A coalition `S` keeps its positions at their
//! values in `x` and masks the other players; non-player positions always
//! keep their values. The default payoff is 1 when the oracle's label on
//! that masked input equals the label of `x`, and 0 otherwise.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::brex::{Label, Oracle};
use crate::formula::{spread_bits, Assignment, TruthValue};
use crate::MAX_WIDTH;

/// Largest number of players accepted by [`shapley_exact`].
pub const SHAPLEY_EXACT_GUARD: usize = 20;

/// Per-position importance scores of an explainer.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMap(Vec<f64>);

impl AttributionMap {
    pub fn new(values: Vec<f64>) -> Self {
        AttributionMap(values)
    }

    pub fn zeros(width: usize) -> Self {
        AttributionMap(vec![0.0; width])
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Characteristic function of the masking game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Payoff {
    /// 1 if the masked input keeps the label of `x`, else 0.
    #[default]
    Preservation,
    /// Fraction of Boolean completions of the masked players that keep the
    /// label of `x`.
    CompletionExpectation,
}

impl core::str::FromStr for Payoff {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "preservation" => Ok(Payoff::Preservation),
            "completion" | "completion-expectation" => Ok(Payoff::CompletionExpectation),
            _ => Err(BaselineError::UnknownPayoff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BaselineError {
    #[error("{players} players exceed the exact Shapley guard of {guard}")]
    GuardExceeded { players: usize, guard: usize },
    #[error("the unmasked input has no determinate label")]
    UndeterminedInput,
    #[error("at least one permutation is required")]
    NoPermutations,
    #[error("input width {0} exceeds 64")]
    WidthUnsupported(usize),
    #[error("player {index} is outside the input width {width}")]
    PlayerOutOfRange { index: usize, width: usize },
    #[error("unknown payoff")]
    UnknownPayoff,
}

/// A cooperative game over `players()` players; coalitions are bitmasks
/// over player slots.
pub trait CoalitionPayoff {
    fn players(&self) -> usize;
    fn value(&mut self, coalition: u64) -> f64;
}

/// The masking game of an oracle at a fixed input.
pub struct MaskingGame<'a, O: ?Sized> {
    oracle: &'a mut O,
    x: &'a Assignment,
    players: Vec<usize>,
    payoff: Payoff,
    reference: Label,
    values: BTreeMap<u64, f64>,
    completions: BTreeMap<u64, Label>,
    table: Vec<f64>,
}

impl<'a, O: Oracle + ?Sized> MaskingGame<'a, O> {
    /// `players` defaults to every position of `x`.
    pub fn new(
        oracle: &'a mut O,
        x: &'a Assignment,
        players: Option<&[usize]>,
        payoff: Payoff,
    ) -> Result<Self, BaselineError> {
        let width = x.width();
        if width > MAX_WIDTH {
            return Err(BaselineError::WidthUnsupported(width));
        }
        let mut players = match players {
            Some(p) => p.to_vec(),
            None => (0..width).collect(),
        };
        players.sort_unstable();
        players.dedup();
        if let Some(&index) = players.iter().find(|&&i| i >= width) {
            return Err(BaselineError::PlayerOutOfRange { index, width });
        }
        let reference = oracle.query(x);
        if reference == Label::Undetermined {
            return Err(BaselineError::UndeterminedInput);
        }
        Ok(MaskingGame {
            oracle,
            x,
            players,
            payoff,
            reference,
            values: BTreeMap::new(),
            completions: BTreeMap::new(),
            table: Vec::new(),
        })
    }

    pub fn player_indices(&self) -> &[usize] {
        &self.players
    }

    fn positions(&self, coalition: u64) -> u64 {
        spread_bits(coalition, &self.players)
    }

    fn all_positions(&self) -> u64 {
        self.players.iter().fold(0, |acc, &p| acc | 1 << p)
    }

    fn completion_label(&mut self, bits: u64, masked: &[usize]) -> Label {
        if let Some(&l) = self.completions.get(&bits) {
            return l;
        }
        let mut values = self.x.values().to_vec();
        for &p in masked {
            values[p] = TruthValue::from_bool(bits >> p & 1 == 1);
        }
        let l = self.oracle.query(&Assignment::new(values));
        self.completions.insert(bits, l);
        l
    }

    fn completion_value(&mut self, coalition: u64) -> f64 {
        let masked: Vec<usize> = (0..self.players.len())
            .filter(|&j| coalition >> j & 1 == 0)
            .map(|j| self.players[j])
            .collect();
        let masked_bits = masked.iter().fold(0u64, |acc, &p| acc | 1 << p);
        let base = self.x.true_bits() & !masked_bits;
        let total = 1u64 << masked.len();
        let mut hits = 0u64;
        for row in 0..total {
            let bits = base | spread_bits(row, &masked);
            if self.completion_label(bits, &masked) == self.reference {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    /// Every coalition's completion value at once: label each Boolean
    /// variant of the players, then sum hits over subsets of the masked
    /// players.
    fn completion_table(&mut self) -> Vec<f64> {
        let n = self.players.len();
        let players = self.players.clone();
        let x_bits = self.x.true_bits();
        let mut sums: Vec<f64> = (0u64..1 << n)
            .map(|d| {
                let bits = x_bits ^ spread_bits(d, &players);
                f64::from(u8::from(self.completion_label(bits, &players) == self.reference))
            })
            .collect();
        for i in 0..n {
            let bit = 1usize << i;
            for t in 0..sums.len() {
                if t & bit != 0 {
                    sums[t] += sums[t ^ bit];
                }
            }
        }
        let all = sums.len() - 1;
        (0..sums.len())
            .map(|s| {
                let masked = all & !s;
                sums[masked] / (1u64 << masked.count_ones()) as f64
            })
            .collect()
    }
}

impl<O: Oracle + ?Sized> CoalitionPayoff for MaskingGame<'_, O> {
    fn players(&self) -> usize {
        self.players.len()
    }

    fn value(&mut self, coalition: u64) -> f64 {
        if let Some(&v) = self.values.get(&coalition) {
            return v;
        }
        let v = match self.payoff {
            Payoff::Preservation => {
                let keep = full_mask(self.x.width()) & !self.all_positions()
                    | self.positions(coalition);
                let label = self.oracle.query(&self.x.mask_bits(keep));
                if label == self.reference {
                    1.0
                } else {
                    0.0
                }
            }
            Payoff::CompletionExpectation if self.players.len() <= SHAPLEY_EXACT_GUARD => {
                if self.table.is_empty() {
                    self.table = self.completion_table();
                }
                return self.table[coalition as usize];
            }
            Payoff::CompletionExpectation => self.completion_value(coalition),
        };
        self.values.insert(coalition, v);
        v
    }
}

fn full_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Exact Shapley values of a game by enumerating every coalition.
pub fn shapley_values<G: CoalitionPayoff + ?Sized>(game: &mut G) -> Result<Vec<f64>, BaselineError> {
    let n = game.players();
    if n > SHAPLEY_EXACT_GUARD {
        return Err(BaselineError::GuardExceeded {
            players: n,
            guard: SHAPLEY_EXACT_GUARD,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let v: Vec<f64> = (0u64..1 << n).map(|s| game.value(s)).collect();
    // weight[s] = s!(n-s-1)!/n! = 1 / (n * C(n-1, s))
    let mut weight = vec![0.0; n];
    let mut binom = 1.0f64;
    for (s, w) in weight.iter_mut().enumerate() {
        *w = 1.0 / (n as f64 * binom);
        binom = binom * (n - 1 - s) as f64 / (s + 1) as f64;
    }
    let mut phi = vec![0.0; n];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        *p = (0..v.len())
            .filter(|s| s & bit == 0)
            .map(|s| weight[s.count_ones() as usize] * (v[s | bit] - v[s]))
            .sum();
    }
    Ok(phi)
}

fn scatter(players: &[usize], width: usize, phi: &[f64]) -> AttributionMap {
    let mut out = vec![0.0; width];
    for (&p, &v) in players.iter().zip(phi) {
        out[p] = v;
    }
    AttributionMap(out)
}

/// Exact Shapley values of the masking game. Positions that are not players
/// score 0.
pub fn shapley_exact<O: Oracle + ?Sized>(
    oracle: &mut O,
    x: &Assignment,
    players: Option<&[usize]>,
    payoff: Payoff,
) -> Result<AttributionMap, BaselineError> {
    let n = players.map_or(x.width(), |p| p.len());
    if n > SHAPLEY_EXACT_GUARD {
        return Err(BaselineError::GuardExceeded {
            players: n,
            guard: SHAPLEY_EXACT_GUARD,
        });
    }
    let mut game = MaskingGame::new(oracle, x, players, payoff)?;
    let phi = shapley_values(&mut game)?;
    Ok(scatter(&game.players, x.width(), &phi))
}

/// Permutation-sampling estimate of the masking game's Shapley values.
pub fn shapley_sampled<O: Oracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    x: &Assignment,
    players: Option<&[usize]>,
    payoff: Payoff,
    num_permutations: usize,
    rng: &mut R,
) -> Result<AttributionMap, BaselineError> {
    if num_permutations == 0 {
        return Err(BaselineError::NoPermutations);
    }
    let mut game = MaskingGame::new(oracle, x, players, payoff)?;
    let n = game.players();
    let mut phi = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..num_permutations {
        order.shuffle(rng);
        let mut coalition = 0u64;
        let mut previous = game.value(0);
        for &j in &order {
            coalition |= 1 << j;
            let current = game.value(coalition);
            phi[j] += current - previous;
            previous = current;
        }
    }
    for p in &mut phi {
        *p /= num_permutations as f64;
    }
    Ok(scatter(&game.players, x.width(), &phi))
}

/// Independent uniform scores in `[0, 1)`.
pub fn random_attribution<R: Rng + ?Sized>(width: usize, rng: &mut R) -> AttributionMap {
    AttributionMap((0..width).map(|_| rng.gen::<f64>()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brex::FormulaOracle;
    use crate::formula::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn exact(f: &str, x: &str, payoff: Payoff) -> Vec<f64> {
        let f = parse(f).unwrap();
        let mut o = FormulaOracle::new(&f);
        shapley_exact(&mut o, &a(x), None, payoff).unwrap().into_vec()
    }

    #[test]
    fn conjunction_is_symmetric() {
        let phi = exact("x1 & x2", "11", Payoff::Preservation);
        assert_eq!(phi[0], phi[1]);
        // v(full) = 1, v(empty) = 0 under K3 masking
        assert!((phi[0] + phi[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_variable_takes_the_whole_margin() {
        let phi = exact("x2", "0100", Payoff::Preservation);
        assert_eq!(phi, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn disjunction_under_true_inputs() {
        // Keeping either variable is enough: each gets 1/2.
        let phi = exact("x1 | x2", "11", Payoff::Preservation);
        assert!((phi[0] - 0.5).abs() < 1e-12 && (phi[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn completion_payoff() {
        // x1 | x2 under 10. v(∅) = 3/4, v({x1}) = 1, v({x2}) = 1/2, v(full) = 1.
        let phi = exact("x1 | x2", "10", Payoff::CompletionExpectation);
        assert!((phi[0] - 0.375).abs() < 1e-12, "{phi:?}");
        assert!((phi[1] + 0.125).abs() < 1e-12, "{phi:?}");
    }

    #[test]
    fn completion_table_matches_direct_enumeration() {
        let f = parse("((x1 ^ !x2) & x3) | (x4 & !x5)").unwrap();
        for bits in 0u64..32 {
            let x = Assignment::from_bits(5, bits);
            let mut o = FormulaOracle::new(&f);
            let mut game = MaskingGame::new(&mut o, &x, None, Payoff::CompletionExpectation).unwrap();
            let table = game.completion_table();
            for s in 0u64..32 {
                assert_eq!(table[s as usize], game.completion_value(s), "x={bits:05b} s={s:05b}");
            }
        }
    }

    #[test]
    fn players_restrict_the_game() {
        let f = parse("x1 & x3").unwrap();
        let mut o = FormulaOracle::new(&f);
        let phi = shapley_exact(&mut o, &a("1010"), Some(&[0, 2]), Payoff::Preservation).unwrap();
        assert_eq!(phi.values(), &[0.5, 0.0, 0.5, 0.0]);
        assert_eq!(o.calls(), 1 + 4);
    }

    #[test]
    fn guard() {
        let f = parse("x1").unwrap();
        let mut o = FormulaOracle::new(&f);
        let x = Assignment::from_bits(21, 1);
        assert_eq!(
            shapley_exact(&mut o, &x, None, Payoff::Preservation),
            Err(BaselineError::GuardExceeded { players: 21, guard: 20 })
        );
    }

    #[test]
    fn sampled_converges_and_is_deterministic() {
        let f = parse("(x1 & x2) | x3").unwrap();
        let x = a("1110");
        let mut o = FormulaOracle::new(&f);
        let truth = shapley_exact(&mut o, &x, None, Payoff::Preservation).unwrap();
        let run = |seed| {
            let mut o = FormulaOracle::new(&f);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            shapley_sampled(&mut o, &x, None, Payoff::Preservation, 4000, &mut rng).unwrap()
        };
        let est = run(5);
        assert_eq!(est, run(5));
        for (e, t) in est.values().iter().zip(truth.values()) {
            assert!((e - t).abs() < 0.05, "{e} vs {t}");
        }
        assert_eq!(est.values()[3], 0.0);
    }

    #[test]
    fn random_scores_are_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = random_attribution(100, &mut rng);
        assert!(r.values().iter().all(|v| (0.0..1.0).contains(v)));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert_eq!(r, random_attribution(100, &mut rng));
    }
}
