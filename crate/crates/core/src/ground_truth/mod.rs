//! Exact degree of responsibility of each variable for the value of a
//! formula under a Boolean assignment.
//!
//! A variable `x` is a cause of the output `O` when some set `W` of other
//! variables (the witness) satisfies two conditions. Flipping any subset of
//! `W` leaves `O` unchanged, and flipping `W ∪ {x}` changes `O`. Its
//! responsibility is `1/(k+1)` for the smallest such witness size `k`, and 0
//! when no witness exists.
//!
//! Two routes compute this:
//!
//! * [`responsibility_read_once`]: a bottom-up pass ([`depends`]) counts, for
//!   every gate, the fewest leaf flips that change its value; a top-down pass
//!   distributes witness sizes to the leaves. Linear in the formula size,
//!   valid only when every variable occurs once.
//! * [`responsibility_brute_force`]: searches witnesses over the full truth
//!   table. Exponential in the arity, valid for any formula.

mod brute;
mod read_once;

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub use brute::{
    min_flips_brute, responsibility_brute_force, smallest_witness, BruteForceOptions, TruthTable,
    DEFAULT_BRUTE_FORCE_GUARD,
};
pub(crate) use brute::next_combination;
pub use read_once::{
    depends, responsibility_read_once, responsibility_read_once_with_stats, ReadOnceStats,
};

use crate::formula::{Assignment, Formula, Operator};

/// Which children of a gate the gate's current value depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CauseKind {
    /// Only flipping both children changes the gate.
    Both,
    /// Flipping either child alone changes the gate.
    Either,
    /// Only a left flip changes the gate.
    Left,
    /// Only a right flip changes the gate.
    Right,
    /// Negation: the value passes straight through from the child.
    Pass,
}

/// Classifies a gate by the smallest child flips that change its value.
///
/// Single-child flips are checked before the two-child flip, so `T & T` is
/// `Either` (one flip suffices) rather than `Both`. `right` is ignored for
/// `Not`.
pub fn classify_cause(op: Operator, left: bool, right: bool) -> CauseKind {
    if op == Operator::Not {
        return CauseKind::Pass;
    }
    let value = op.apply(left, right);
    let left_flip = op.apply(!left, right) != value;
    let right_flip = op.apply(left, !right) != value;
    match (left_flip, right_flip) {
        (true, true) => CauseKind::Either,
        (true, false) => CauseKind::Left,
        (false, true) => CauseKind::Right,
        (false, false) => {
            debug_assert!(op.apply(!left, !right) != value);
            CauseKind::Both
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundTruthError {
    #[error("formula is not read-once; use the brute-force route")]
    NotReadOnce,
    #[error("variable x{} is unassigned", .0 + 1)]
    Unassigned(usize),
    #[error("formula uses x{} but the assignment has width {width}", .index + 1)]
    WidthMismatch { index: usize, width: usize },
    #[error("arity {arity} exceeds the brute-force guard of {guard}")]
    GuardExceeded { arity: usize, guard: usize },
}

/// Per-node minimum number of leaf flips that change the node's value,
/// indexed in pre-order (root is node 0, a left subtree precedes the right).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepsMap(pub(crate) Vec<u32>);

impl DepsMap {
    pub fn root(&self) -> u32 {
        self.0[0]
    }

    pub fn get(&self, node: usize) -> Option<u32> {
        self.0.get(node).copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// An exact responsibility value: 0, or `1/(k+1)` for witness size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Responsibility {
    num: u32,
    den: u32,
}

impl Responsibility {
    pub const ZERO: Responsibility = Responsibility { num: 0, den: 1 };
    pub const ONE: Responsibility = Responsibility { num: 1, den: 1 };

    pub fn from_witness_size(k: u32) -> Self {
        Responsibility { num: 1, den: k + 1 }
    }

    pub fn numerator(self) -> u32 {
        self.num
    }

    pub fn denominator(self) -> u32 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// Witness size `k`, `None` for a non-cause.
    pub fn witness_size(self) -> Option<u32> {
        (self.num == 1).then(|| self.den - 1)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Responsibility {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Responsibility {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl fmt::Display for Responsibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => f.write_str("0"),
            (n, 1) => write!(f, "{n}"),
            (n, d) => write!(f, "{n}/{d}"),
        }
    }
}

/// Ground-truth responsibility of every input position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponsibilityMap(Vec<Responsibility>);

impl ResponsibilityMap {
    pub fn zeros(width: usize) -> Self {
        ResponsibilityMap(alloc::vec![Responsibility::ZERO; width])
    }

    pub fn from_values(values: Vec<Responsibility>) -> Self {
        ResponsibilityMap(values)
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, index: usize) -> Option<Responsibility> {
        self.0.get(index).copied()
    }

    pub fn values(&self) -> &[Responsibility] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.to_f64()).collect()
    }

    /// Indices with non-zero responsibility.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn set(&mut self, index: usize, value: Responsibility) {
        self.0[index] = value;
    }
}

/// Ground truth by the fastest applicable route: the linear pass for
/// read-once formulae, brute force otherwise.
pub fn responsibility(
    formula: &Formula,
    assignment: &Assignment,
    options: &BruteForceOptions,
) -> Result<ResponsibilityMap, GroundTruthError> {
    if formula.meta().read_once {
        responsibility_read_once(formula, assignment)
    } else {
        responsibility_brute_force(formula, assignment, options)
    }
}

/// Checks width and that every used variable holds a Boolean value.
/// Returns the bits of the `True` positions.
pub(crate) fn boolean_bits(
    formula: &Formula,
    assignment: &Assignment,
) -> Result<u64, GroundTruthError> {
    let width = assignment.width();
    let mut error = None;
    formula.for_each_var(&mut |i| {
        if error.is_some() {
            return;
        }
        match assignment.get(i) {
            None => error = Some(GroundTruthError::WidthMismatch { index: i, width }),
            Some(v) if !v.is_assigned() => error = Some(GroundTruthError::Unassigned(i)),
            Some(_) => {}
        }
    });
    match error {
        Some(e) => Err(e),
        None => Ok(assignment.true_bits()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_cause(Operator::And, false, false), CauseKind::Both);
        assert_eq!(classify_cause(Operator::And, true, true), CauseKind::Either);
        assert_eq!(classify_cause(Operator::Xor, true, false), CauseKind::Either);
        assert_eq!(classify_cause(Operator::And, true, false), CauseKind::Right);
        assert_eq!(classify_cause(Operator::And, false, true), CauseKind::Left);
        assert_eq!(classify_cause(Operator::Or, true, true), CauseKind::Both);
        assert_eq!(classify_cause(Operator::Or, false, false), CauseKind::Either);
        assert_eq!(classify_cause(Operator::Or, true, false), CauseKind::Left);
        assert_eq!(classify_cause(Operator::Not, true, false), CauseKind::Pass);
    }

    #[test]
    fn classification_is_total_and_minimal() {
        // Brute-force check: the kind names exactly the minimal flip sets.
        for op in [Operator::And, Operator::Or, Operator::Xor] {
            for l in [false, true] {
                for r in [false, true] {
                    let g = op.apply(l, r);
                    let single_l = op.apply(!l, r) != g;
                    let single_r = op.apply(l, !r) != g;
                    let double = op.apply(!l, !r) != g;
                    let expected = match (single_l, single_r, double) {
                        (true, true, _) => CauseKind::Either,
                        (true, false, _) => CauseKind::Left,
                        (false, true, _) => CauseKind::Right,
                        (false, false, true) => CauseKind::Both,
                        (false, false, false) => unreachable!("binary gates always flip"),
                    };
                    assert_eq!(classify_cause(op, l, r), expected);
                }
            }
        }
    }

    #[test]
    fn responsibility_values() {
        let third = Responsibility::from_witness_size(2);
        assert_eq!((third.numerator(), third.denominator()), (1, 3));
        assert_eq!(third.witness_size(), Some(2));
        assert_eq!(Responsibility::ZERO.witness_size(), None);
        assert!(Responsibility::ONE > third && third > Responsibility::ZERO);
        assert_eq!(alloc::format!("{third}"), "1/3");
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-15);
    }
}
