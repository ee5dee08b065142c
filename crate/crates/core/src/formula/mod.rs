//! Boolean formulae over indexed variables, evaluated classically or under
//! strong Kleene (K3) semantics.

mod assignment;
mod generate;
mod parse;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Not;

pub use assignment::{
    enumerate_assignments, sample_assignments, Assignment, AssignmentError, Assignments,
    MAX_ENUMERATION_WIDTH,
};
pub use generate::{chain_formula, random_formula, Family, GenerateError, GeneratorParams};
pub use parse::{parse, parse_with_width, ParseError, ParseErrorKind};

/// A value of strong three-valued Kleene logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthValue {
    False,
    True,
    Unassigned,
}

impl TruthValue {
    pub fn from_bool(value: bool) -> Self {
        if value {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }

    /// The Boolean value, or `None` when unassigned.
    pub fn as_bool(self) -> Option<bool> {
        match self {
            TruthValue::False => Some(false),
            TruthValue::True => Some(true),
            TruthValue::Unassigned => None,
        }
    }

    pub fn is_assigned(self) -> bool {
        self != TruthValue::Unassigned
    }

    pub fn and(self, other: Self) -> Self {
        use TruthValue::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Unassigned,
        }
    }

    pub fn or(self, other: Self) -> Self {
        use TruthValue::*;
        match (self, other) {
            (True, _) | (_, True) => True,
            (False, False) => False,
            _ => Unassigned,
        }
    }

    pub fn xor(self, other: Self) -> Self {
        match (self.as_bool(), other.as_bool()) {
            (Some(a), Some(b)) => TruthValue::from_bool(a ^ b),
            _ => TruthValue::Unassigned,
        }
    }

    pub(crate) fn symbol(self) -> char {
        match self {
            TruthValue::False => '0',
            TruthValue::True => '1',
            TruthValue::Unassigned => 'U',
        }
    }
}

impl Not for TruthValue {
    type Output = Self;

    fn not(self) -> Self {
        match self {
            TruthValue::False => TruthValue::True,
            TruthValue::True => TruthValue::False,
            TruthValue::Unassigned => TruthValue::Unassigned,
        }
    }
}

impl From<bool> for TruthValue {
    fn from(value: bool) -> Self {
        TruthValue::from_bool(value)
    }
}

/// Gate operators. `Not` is the only unary one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Not,
    And,
    Or,
    Xor,
}

impl Operator {
    /// Classical semantics. `right` is ignored for `Not`.
    pub fn apply(self, left: bool, right: bool) -> bool {
        match self {
            Operator::Not => !left,
            Operator::And => left & right,
            Operator::Or => left | right,
            Operator::Xor => left ^ right,
        }
    }

    pub fn apply_k3(self, left: TruthValue, right: TruthValue) -> TruthValue {
        match self {
            Operator::Not => !left,
            Operator::And => left.and(right),
            Operator::Or => left.or(right),
            Operator::Xor => left.xor(right),
        }
    }

    pub fn token(self) -> char {
        match self {
            Operator::Not => '!',
            Operator::And => '&',
            Operator::Or => '|',
            Operator::Xor => '^',
        }
    }
}

/// Parse tree of a Boolean expression. Variable indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Xor(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(index: usize) -> Self {
        Formula::Var(index)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: Formula) -> Self {
        Formula::Not(Box::new(child))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Box::new(left), Box::new(right))
    }

    pub fn xor(left: Formula, right: Formula) -> Self {
        Formula::Xor(Box::new(left), Box::new(right))
    }

    pub fn binary(op: Operator, left: Formula, right: Formula) -> Self {
        match op {
            Operator::And => Formula::and(left, right),
            Operator::Or => Formula::or(left, right),
            Operator::Xor => Formula::xor(left, right),
            Operator::Not => panic!("`Not` is not a binary operator"),
        }
    }

    /// Operator at the root, `None` for a variable leaf.
    pub fn operator(&self) -> Option<Operator> {
        match self {
            Formula::Var(_) => None,
            Formula::Not(_) => Some(Operator::Not),
            Formula::And(..) => Some(Operator::And),
            Formula::Or(..) => Some(Operator::Or),
            Formula::Xor(..) => Some(Operator::Xor),
        }
    }

    /// Direct children: `(None, None)` for a leaf, `(Some, None)` for `Not`.
    pub fn children(&self) -> (Option<&Formula>, Option<&Formula>) {
        match self {
            Formula::Var(_) => (None, None),
            Formula::Not(c) => (Some(c), None),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Xor(l, r) => (Some(l), Some(r)),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self.children() {
            (None, _) => 1,
            (Some(c), None) => 1 + c.size(),
            (Some(l), Some(r)) => 1 + l.size() + r.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self.children() {
            (None, _) => 1,
            (Some(c), None) => 1 + c.depth(),
            (Some(l), Some(r)) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Calls `f` on every variable occurrence, left to right.
    pub fn for_each_var(&self, f: &mut impl FnMut(usize)) {
        match self {
            Formula::Var(i) => f(*i),
            Formula::Not(c) => c.for_each_var(f),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Xor(l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
        }
    }

    pub fn max_var(&self) -> usize {
        let mut max = 0;
        self.for_each_var(&mut |i| max = max.max(i));
        max
    }

    /// Smallest input width that can hold every variable of the formula.
    pub fn min_width(&self) -> usize {
        self.max_var() + 1
    }

    pub fn meta(&self) -> FormulaMeta {
        let mut occurrences: Vec<(usize, usize)> = Vec::new();
        self.for_each_var(&mut |i| match occurrences.binary_search_by_key(&i, |&(v, _)| v) {
            Ok(pos) => occurrences[pos].1 += 1,
            Err(pos) => occurrences.insert(pos, (i, 1)),
        });
        let read_once = occurrences.iter().all(|&(_, n)| n == 1);
        FormulaMeta {
            arity: occurrences.len(),
            used_vars: occurrences.into_iter().map(|(v, _)| v).collect(),
            read_once,
        }
    }

    /// Classical evaluation; bit `i` of `bits` is the value of variable `i`.
    pub fn eval_bits(&self, bits: u64) -> bool {
        match self {
            Formula::Var(i) => (bits >> i) & 1 == 1,
            Formula::Not(c) => !c.eval_bits(bits),
            Formula::And(l, r) => l.eval_bits(bits) && r.eval_bits(bits),
            Formula::Or(l, r) => l.eval_bits(bits) || r.eval_bits(bits),
            Formula::Xor(l, r) => l.eval_bits(bits) ^ r.eval_bits(bits),
        }
    }

    /// Strong Kleene evaluation. Variables beyond the assignment's width
    /// read as `Unassigned`.
    pub fn evaluate_k3(&self, assignment: &Assignment) -> TruthValue {
        match self {
            Formula::Var(i) => assignment.get(*i).unwrap_or(TruthValue::Unassigned),
            Formula::Not(c) => !c.evaluate_k3(assignment),
            Formula::And(l, r) => {
                let left = l.evaluate_k3(assignment);
                if left == TruthValue::False {
                    return TruthValue::False;
                }
                left.and(r.evaluate_k3(assignment))
            }
            Formula::Or(l, r) => {
                let left = l.evaluate_k3(assignment);
                if left == TruthValue::True {
                    return TruthValue::True;
                }
                left.or(r.evaluate_k3(assignment))
            }
            Formula::Xor(l, r) => l.evaluate_k3(assignment).xor(r.evaluate_k3(assignment)),
        }
    }

    /// Classical evaluation of a Boolean assignment. `None` if any variable
    /// of the formula is unassigned or out of range.
    pub fn evaluate(&self, assignment: &Assignment) -> Option<bool> {
        match self {
            Formula::Var(i) => assignment.get(*i)?.as_bool(),
            Formula::Not(c) => c.evaluate(assignment).map(|v| !v),
            Formula::And(l, r) => Some(l.evaluate(assignment)? & r.evaluate(assignment)?),
            Formula::Or(l, r) => Some(l.evaluate(assignment)? | r.evaluate(assignment)?),
            Formula::Xor(l, r) => Some(l.evaluate(assignment)? ^ r.evaluate(assignment)?),
        }
    }

    /// True if the formula evaluates to the same value under every
    /// assignment of its variables. Enumerates `2^arity` assignments.
    pub fn is_constant(&self) -> bool {
        let used = self.meta().used_vars;
        let first = self.eval_bits(0);
        (1u64..1 << used.len()).all(|c| self.eval_bits(spread_bits(c, &used)) == first)
    }
}

/// Maps bit `j` of `compact` to bit `positions[j]` of the result.
pub(crate) fn spread_bits(compact: u64, positions: &[usize]) -> u64 {
    positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| (compact >> j) & 1 == 1)
        .fold(0, |acc, (_, &p)| acc | 1 << p)
}

impl fmt::Display for Formula {
    /// Fully parenthesised binary gates, `!` binds tightly: `!(x1 & x2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "x{}", i + 1),
            Formula::Not(c) => write!(f, "!{c}"),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Xor(l, r) => {
                let op = self.operator().map(Operator::token).unwrap_or('?');
                write!(f, "({l} {op} {r})")
            }
        }
    }
}

/// Renders a formula in the corpus grammar; `parse(&render(f)) == f`.
pub fn render(formula: &Formula) -> alloc::string::String {
    alloc::format!("{formula}")
}

/// Structural facts about a formula used to pick the ground-truth algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaMeta {
    /// Number of distinct variables.
    pub arity: usize,
    /// Sorted distinct variable indices.
    pub used_vars: Vec<usize>,
    /// Every used variable occurs exactly once.
    pub read_once: bool,
}
