use rand::seq::SliceRandom;
use rand::Rng;

use super::{Formula, Operator};

/// Operator family of a generated formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `&` and `|` only.
    Monotonic,
    /// `&`, `|`, `^` and `!`.
    Nonmonotonic,
}

impl Family {
    pub fn binary_operators(self) -> &'static [Operator] {
        match self {
            Family::Monotonic => &[Operator::And, Operator::Or],
            Family::Nonmonotonic => &[Operator::And, Operator::Or, Operator::Xor],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Monotonic => "monotonic",
            Family::Nonmonotonic => "nonmonotonic",
        }
    }
}

impl core::str::FromStr for Family {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monotonic" | "mono" => Ok(Family::Monotonic),
            "nonmonotonic" | "non-monotonic" | "nonmono" => Ok(Family::Nonmonotonic),
            _ => Err(GenerateError::UnknownFamily),
        }
    }
}

impl core::fmt::Display for Family {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("arity {arity} must be between 1 and the input width {width}")]
    ArityOutOfRange { arity: usize, width: usize },
    #[error("unknown formula family")]
    UnknownFamily,
    #[error("no non-constant formula found after {0} attempts")]
    OnlyConstants(usize),
}

/// Knobs of the random generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    /// Input width the variables are drawn from.
    pub width: usize,
    /// Probability of negating each subtree (non-monotonic family only).
    pub negate_prob: f64,
    /// Probability of adding a second occurrence of each variable
    /// (general, non-read-once mode only).
    pub duplicate_prob: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            width: 12,
            negate_prob: 0.25,
            duplicate_prob: 0.3,
        }
    }
}

const MAX_ATTEMPTS: usize = 1000;

/// Random formula over exactly `arity` distinct variables drawn from the
/// input width.
///
/// The variable multiset (one occurrence each, plus random duplicates in
/// general mode) is shuffled and split recursively at a uniform point into
/// two non-empty halves joined by a uniformly chosen operator of the family.
/// Non-monotonic formulae negate each subtree independently. Constant
/// formulae, which only general mode can produce, are rejected and redrawn.
pub fn random_formula<R: Rng + ?Sized>(
    params: &GeneratorParams,
    arity: usize,
    family: Family,
    read_once: bool,
    rng: &mut R,
) -> Result<Formula, GenerateError> {
    if arity == 0 || arity > params.width || params.width > crate::MAX_WIDTH {
        return Err(GenerateError::ArityOutOfRange {
            arity,
            width: params.width,
        });
    }
    for _ in 0..MAX_ATTEMPTS {
        let mut vars = rand::seq::index::sample(rng, params.width, arity).into_vec();
        vars.sort_unstable();
        let mut leaves = vars.clone();
        if !read_once {
            for &v in &vars {
                if rng.gen_bool(params.duplicate_prob) {
                    leaves.push(v);
                }
            }
        }
        leaves.shuffle(rng);
        let formula = build(&leaves, family, params.negate_prob, rng);
        if read_once || !formula.is_constant() {
            return Ok(formula);
        }
    }
    Err(GenerateError::OnlyConstants(MAX_ATTEMPTS))
}

fn build<R: Rng + ?Sized>(leaves: &[usize], family: Family, negate_prob: f64, rng: &mut R) -> Formula {
    let node = if leaves.len() == 1 {
        Formula::Var(leaves[0])
    } else {
        let split = rng.gen_range(1..leaves.len());
        let ops = family.binary_operators();
        let op = ops[rng.gen_range(0..ops.len())];
        let left = build(&leaves[..split], family, negate_prob, rng);
        let right = build(&leaves[split..], family, negate_prob, rng);
        Formula::binary(op, left, right)
    };
    if family == Family::Nonmonotonic && rng.gen_bool(negate_prob) {
        Formula::not(node)
    } else {
        node
    }
}

/// Left-leaning chain over `x1..x{arity}` cycling through `ops`:
/// `(((x1 o1 x2) o2 x3) o1 x4) ...`.
pub fn chain_formula(arity: usize, ops: &[Operator]) -> Formula {
    assert!(arity >= 1 && !ops.is_empty());
    (1..arity).fold(Formula::var(0), |acc, i| {
        Formula::binary(ops[(i - 1) % ops.len()], acc, Formula::var(i))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{enumerate_assignments, render};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn count_ops(f: &Formula, out: &mut [usize; 4]) {
        match f.operator() {
            None => {}
            Some(op) => {
                out[op as usize] += 1;
                let (l, r) = f.children();
                if let Some(l) = l {
                    count_ops(l, out);
                }
                if let Some(r) = r {
                    count_ops(r, out);
                }
            }
        }
    }

    #[test]
    fn arity_one_is_a_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = GeneratorParams::default();
        for _ in 0..20 {
            let f = random_formula(&p, 1, Family::Monotonic, true, &mut rng).unwrap();
            assert!(matches!(f, Formula::Var(_)));
            let mut g = random_formula(&p, 1, Family::Nonmonotonic, true, &mut rng).unwrap();
            while let Formula::Not(c) = g {
                g = *c;
            }
            assert!(matches!(g, Formula::Var(_)));
        }
    }

    #[test]
    fn arity_three_monotonic_read_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = GeneratorParams::default();
        for _ in 0..50 {
            let f = random_formula(&p, 3, Family::Monotonic, true, &mut rng).unwrap();
            let meta = f.meta();
            assert_eq!(meta.arity, 3);
            assert!(meta.read_once);
            let mut ops = [0; 4];
            count_ops(&f, &mut ops);
            assert_eq!(ops[Operator::And as usize] + ops[Operator::Or as usize], 2);
            assert_eq!(ops[Operator::Not as usize] + ops[Operator::Xor as usize], 0);
        }
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let p = GeneratorParams::default();
        let a = random_formula(&p, 7, Family::Nonmonotonic, false, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_formula(&p, 7, Family::Nonmonotonic, false, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(render(&a.unwrap()), render(&b.unwrap()));
    }

    #[test]
    fn arity_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = GeneratorParams::default();
        assert!(random_formula(&p, 0, Family::Monotonic, true, &mut rng).is_err());
        assert!(random_formula(&p, 13, Family::Monotonic, true, &mut rng).is_err());
        assert!(random_formula(&p, 12, Family::Monotonic, true, &mut rng).is_ok());
    }

    #[test]
    fn general_mode_uses_every_variable_and_is_never_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = GeneratorParams::default();
        let mut saw_repeat = false;
        for arity in 1..=8 {
            for _ in 0..30 {
                let f = random_formula(&p, arity, Family::Nonmonotonic, false, &mut rng).unwrap();
                let meta = f.meta();
                assert_eq!(meta.arity, arity);
                saw_repeat |= !meta.read_once;
                assert!(!f.is_constant());
            }
        }
        assert!(saw_repeat);
    }

    #[test]
    fn monotonic_formulae_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = GeneratorParams {
            width: 6,
            ..GeneratorParams::default()
        };
        for read_once in [true, false] {
            for _ in 0..40 {
                let arity = rng.gen_range(1..=6);
                let f = random_formula(&p, arity, Family::Monotonic, read_once, &mut rng).unwrap();
                for a in enumerate_assignments(6, None).unwrap() {
                    let bits = a.true_bits();
                    if !f.eval_bits(bits) {
                        continue;
                    }
                    for i in 0..6 {
                        assert!(f.eval_bits(bits | 1 << i), "{} not monotone", render(&f));
                    }
                }
            }
        }
    }

    #[test]
    fn chain_shapes() {
        let f = chain_formula(4, &[Operator::And, Operator::Or]);
        assert_eq!(render(&f), "(((x1 & x2) | x3) & x4)");
        let g = chain_formula(3, &[Operator::Xor, Operator::And]);
        assert_eq!(render(&g), "((x1 ^ x2) & x3)");
    }
}
