use brex_core::brex::derive_seed;
use brex_core::formula::{chain_formula, parse, random_formula, GeneratorParams};
use brex_core::{Family, Formula, Operator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CorpusKind, ExperimentConfig};
use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub family: Family,
    pub arity: usize,
    pub formula: Formula,
}

impl CorpusEntry {
    fn new(id: String, family: Family, formula: Formula) -> Self {
        let arity = formula.meta().arity;
        CorpusEntry {
            id,
            family,
            arity,
            formula,
        }
    }
}

fn family_stream(family: Family) -> u64 {
    match family {
        Family::Monotonic => 0,
        Family::Nonmonotonic => 1,
    }
}

/// Seeded random formulae, `per_arity` for each family and arity. Every
/// (family, arity) pair draws from its own stream, so adding arities or
/// families does not change the formulae of the others.
pub fn random_corpus(
    width: usize,
    arities: &[usize],
    families: &[Family],
    per_arity: usize,
    read_once: bool,
    seed: u64,
) -> Result<Vec<CorpusEntry>, BenchError> {
    let params = GeneratorParams {
        width,
        ..GeneratorParams::default()
    };
    let mut out = Vec::new();
    for &family in families {
        for &arity in arities {
            let stream = family_stream(family) << 32 | arity as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream));
            for idx in 0..per_arity {
                let formula = random_formula(&params, arity, family, read_once, &mut rng)?;
                out.push(CorpusEntry::new(
                    format!("{}-a{arity:02}-{idx:03}", family.name()),
                    family,
                    formula,
                ));
            }
        }
    }
    Ok(out)
}

/// Operators a chain of the family cycles through.
pub fn chain_operators(family: Family) -> &'static [Operator] {
    match family {
        Family::Monotonic => &[Operator::And, Operator::Or],
        Family::Nonmonotonic => &[Operator::Xor, Operator::And],
    }
}

/// The small hand-written formulae of the fixed-structure corpus.
pub fn fixed_formulae() -> Vec<(&'static str, Family, &'static str)> {
    vec![
        ("and", Family::Monotonic, "x1 & x2"),
        ("or", Family::Monotonic, "x1 | x2"),
        ("xor", Family::Nonmonotonic, "x1 ^ x2"),
        ("xor_and_xor", Family::Nonmonotonic, "(x1 ^ x2) & (x3 ^ x4)"),
    ]
}

/// Chains over `x1..x{arity}` for each family and arity, followed by the
/// hand-written formulae of the selected families.
pub fn fixed_structure_corpus(arities: &[usize], families: &[Family]) -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for &family in families {
        for &arity in arities {
            out.push(CorpusEntry::new(
                format!("chain-{}-a{arity:02}", family.name()),
                family,
                chain_formula(arity, chain_operators(family)),
            ));
        }
    }
    for (name, family, text) in fixed_formulae() {
        if families.contains(&family) {
            let formula = parse(text).expect("fixed formulae parse");
            out.push(CorpusEntry::new(format!("fixed-{name}"), family, formula));
        }
    }
    out
}

pub fn build_corpus(config: &ExperimentConfig) -> Result<Vec<CorpusEntry>, BenchError> {
    config.validate()?;
    let families = config.family.families();
    Ok(match config.corpus {
        CorpusKind::Random => random_corpus(
            config.width,
            &config.arities,
            families,
            config.formulae_per_arity,
            config.read_once,
            config.seed,
        )?,
        CorpusKind::FixedStructure => fixed_structure_corpus(&config.arities, families),
    })
}
