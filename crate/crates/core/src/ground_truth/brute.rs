use alloc::vec::Vec;

use super::{boolean_bits, GroundTruthError, Responsibility, ResponsibilityMap};
use crate::formula::{spread_bits, Assignment, Formula};

pub const DEFAULT_BRUTE_FORCE_GUARD: usize = 15;

/// Above this arity the tables no longer fit comfortably in memory, guard or not.
const HARD_LIMIT: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceOptions {
    /// Largest arity accepted unless `ignore_guard` is set.
    pub guard: usize,
    pub ignore_guard: bool,
    /// Only require that flipping the witness itself preserves the output,
    /// instead of every subset of it.
    pub relax_subset_condition: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            guard: DEFAULT_BRUTE_FORCE_GUARD,
            ignore_guard: false,
            relax_subset_condition: false,
        }
    }
}

impl BruteForceOptions {
    fn check(&self, arity: usize) -> Result<(), GroundTruthError> {
        let limit = if self.ignore_guard { HARD_LIMIT } else { self.guard.min(HARD_LIMIT) };
        if arity > limit {
            return Err(GroundTruthError::GuardExceeded { arity, guard: limit });
        }
        Ok(())
    }
}

/// Classical truth table of a formula over its used variables. Bit `j` of a
/// row index is the value of `used_vars()[j]`.
#[derive(Debug, Clone)]
pub struct TruthTable {
    used: Vec<usize>,
    rows: Vec<bool>,
}

impl TruthTable {
    pub fn new(formula: &Formula, options: &BruteForceOptions) -> Result<Self, GroundTruthError> {
        let used = formula.meta().used_vars;
        options.check(used.len())?;
        let rows = (0u64..1 << used.len())
            .map(|row| formula.eval_bits(spread_bits(row, &used)))
            .collect();
        Ok(TruthTable { used, rows })
    }

    pub fn used_vars(&self) -> &[usize] {
        &self.used
    }

    pub fn arity(&self) -> usize {
        self.used.len()
    }

    pub fn value(&self, row: u64) -> bool {
        self.rows[row as usize]
    }

    /// Row index of a (full-width) assignment.
    pub fn row_of(&self, true_bits: u64) -> u64 {
        self.used
            .iter()
            .enumerate()
            .filter(|&(_, &p)| (true_bits >> p) & 1 == 1)
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }

    /// `preserve[m]`: flipping the used variables in compact mask `m`
    /// leaves the output unchanged.
    fn preserve_table(&self, row: u64) -> Vec<bool> {
        let out = self.value(row);
        (0u64..1 << self.arity())
            .map(|m| self.value(row ^ m) == out)
            .collect()
    }

    /// `closed[m]`: flipping every subset of `m` preserves the output.
    fn subset_closed(preserve: &[bool], arity: usize) -> Vec<bool> {
        let mut closed = alloc::vec![false; preserve.len()];
        for m in 0..preserve.len() {
            closed[m] = preserve[m]
                && (0..arity)
                    .filter(|j| (m >> j) & 1 == 1)
                    .all(|j| closed[m & !(1 << j)]);
        }
        closed
    }

    /// Responsibility of every used variable under the assignment whose
    /// `True` positions are `true_bits`, as a map of the given width.
    pub fn responsibility(
        &self,
        true_bits: u64,
        width: usize,
        relax_subset_condition: bool,
    ) -> ResponsibilityMap {
        let row = self.row_of(true_bits);
        let preserve = self.preserve_table(row);
        let admissible = if relax_subset_condition {
            preserve.clone()
        } else {
            Self::subset_closed(&preserve, self.arity())
        };
        let mut best = alloc::vec![u32::MAX; self.arity()];
        for (m, _) in admissible.iter().enumerate().filter(|(_, ok)| **ok) {
            let size = m.count_ones();
            for (j, slot) in best.iter_mut().enumerate() {
                let bit = 1 << j;
                if m & bit == 0 && size < *slot && !preserve[m | bit] {
                    *slot = size;
                }
            }
        }
        let mut map = ResponsibilityMap::zeros(width);
        for (j, &k) in best.iter().enumerate() {
            if k != u32::MAX {
                map.set(self.used[j], Responsibility::from_witness_size(k));
            }
        }
        map
    }

    /// Fewest used variables whose flip changes the output.
    pub fn min_flips(&self, true_bits: u64) -> u32 {
        let row = self.row_of(true_bits);
        let out = self.value(row);
        (1u64..1 << self.arity())
            .filter(|&m| self.value(row ^ m) != out)
            .map(|m| m.count_ones())
            .min()
            .expect("non-constant formula")
    }
}

/// Exhaustive minimum over non-empty flip sets of used variables that
/// change the classical output. Constant formulae report `u32::MAX`.
pub fn min_flips_brute(
    formula: &Formula,
    assignment: &Assignment,
    options: &BruteForceOptions,
) -> Result<u32, GroundTruthError> {
    let bits = boolean_bits(formula, assignment)?;
    let table = TruthTable::new(formula, options)?;
    if formula.is_constant() {
        return Ok(u32::MAX);
    }
    Ok(table.min_flips(bits))
}

/// Exact responsibility of every position by exhaustive witness search over
/// the formula's truth table.
pub fn responsibility_brute_force(
    formula: &Formula,
    assignment: &Assignment,
    options: &BruteForceOptions,
) -> Result<ResponsibilityMap, GroundTruthError> {
    let bits = boolean_bits(formula, assignment)?;
    let table = TruthTable::new(formula, options)?;
    Ok(table.responsibility(bits, assignment.width(), options.relax_subset_condition))
}

/// The first smallest witness for `var`, searching by size and then in
/// lexicographic order of variable indices. `None` if `var` is not a cause.
pub fn smallest_witness(
    formula: &Formula,
    assignment: &Assignment,
    var: usize,
    options: &BruteForceOptions,
) -> Result<Option<Vec<usize>>, GroundTruthError> {
    let bits = boolean_bits(formula, assignment)?;
    let table = TruthTable::new(formula, options)?;
    let Some(target) = table.used.iter().position(|&v| v == var) else {
        return Ok(None);
    };
    let row = table.row_of(bits);
    let preserve = table.preserve_table(row);
    let admissible = if options.relax_subset_condition {
        preserve.clone()
    } else {
        TruthTable::subset_closed(&preserve, table.arity())
    };
    let others: Vec<usize> = (0..table.arity()).filter(|&j| j != target).collect();
    for size in 0..=others.len() {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let m = combo.iter().fold(0usize, |acc, &c| acc | 1 << others[c]);
            if admissible[m] && !preserve[m | 1 << target] {
                return Ok(Some(combo.iter().map(|&c| table.used[others[c]]).collect()));
            }
            if !next_combination(&mut combo, others.len()) {
                break;
            }
        }
    }
    Ok(None)
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination of the same size in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn r(k: u32) -> Responsibility {
        Responsibility::from_witness_size(k)
    }

    fn brute(f: &str, x: &str) -> Vec<Responsibility> {
        responsibility_brute_force(&parse(f).unwrap(), &a(x), &BruteForceOptions::default())
            .unwrap()
            .values()
            .to_vec()
    }

    #[test]
    fn examples() {
        assert_eq!(brute("x1 & (x2 & x3)", "000"), [r(2), r(2), r(2)]);
        assert_eq!(brute("x1 | x2", "11"), [r(1), r(1)]);
        assert_eq!(brute("x1 ^ x2", "10"), [r(0), r(0)]);
        assert_eq!(brute("x1 & x2", "11"), [r(0), r(0)]);
    }

    #[test]
    fn min_flips_examples() {
        let o = BruteForceOptions::default();
        assert_eq!(min_flips_brute(&parse("x1 & x2").unwrap(), &a("11"), &o), Ok(1));
        assert_eq!(min_flips_brute(&parse("x1 & (x2 & x3)").unwrap(), &a("000"), &o), Ok(3));
        assert_eq!(min_flips_brute(&parse("x1").unwrap(), &a("0"), &o), Ok(1));
    }

    #[test]
    fn repeated_variables() {
        // x1 | (x1 & x2): x2 never matters.
        assert_eq!(brute("x1 | (x1 & x2)", "11"), [r(0), Responsibility::ZERO]);
        // (x1 & x2) | (!x1 & x3) under 110: x1 and x2 but-for, x3 needs x1 flipped
        // first, but that flip alone changes the output.
        assert_eq!(
            brute("(x1 & x2) | (!x1 & x3)", "110"),
            [r(0), r(0), Responsibility::ZERO]
        );
    }

    #[test]
    fn guard_is_enforced() {
        let f = parse(
            "x1 & x2 & x3 & x4 & x5 & x6 & x7 & x8 & x9 & x10 & x11 & x12 & x13 & x14 & x15 & x16",
        )
        .unwrap();
        let x = Assignment::from_bits(16, u64::MAX);
        let err = responsibility_brute_force(&f, &x, &BruteForceOptions::default()).unwrap_err();
        assert_eq!(err, GroundTruthError::GuardExceeded { arity: 16, guard: 15 });
        let opts = BruteForceOptions {
            ignore_guard: true,
            ..BruteForceOptions::default()
        };
        let map = responsibility_brute_force(&f, &x, &opts).unwrap();
        assert!(map.values().iter().all(|&v| v == r(0)));
    }

    #[test]
    fn smallest_witness_is_lexicographic() {
        let f = parse("(x1 | x2) & (x3 | x4)").unwrap();
        let o = BruteForceOptions::default();
        // 1111: x1 needs x2 flipped.
        assert_eq!(smallest_witness(&f, &a("1111"), 0, &o), Ok(Some(vec![1])));
        // 0000 for x1 | x2 | x3: each is but-for.
        let g = parse("x1 | x2 | x3").unwrap();
        assert_eq!(smallest_witness(&g, &a("000"), 2, &o), Ok(Some(vec![])));
        assert_eq!(smallest_witness(&g, &a("1110"), 3, &o), Ok(None));
        let h = parse("x1 | x2 | x3").unwrap();
        assert_eq!(smallest_witness(&h, &a("111"), 0, &o), Ok(Some(vec![1, 2])));
    }

    #[test]
    fn combinations_in_order() {
        let mut c = vec![0, 1];
        let mut seen = vec![c.clone()];
        while next_combination(&mut c, 4) {
            seen.push(c.clone());
        }
        assert_eq!(
            seen,
            [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]].map(|x| x.to_vec())
        );
        let mut empty: Vec<usize> = vec![];
        assert!(!next_combination(&mut empty, 3));
    }
}
