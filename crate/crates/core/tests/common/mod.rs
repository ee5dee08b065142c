#![allow(dead_code)]

use brex_core::formula::{random_formula, GeneratorParams};
use brex_core::{Family, Formula};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn family(nonmonotonic: bool) -> Family {
    if nonmonotonic {
        Family::Nonmonotonic
    } else {
        Family::Monotonic
    }
}

pub fn formula(seed: u64, width: usize, arity: usize, nonmonotonic: bool, read_once: bool) -> Formula {
    let params = GeneratorParams {
        width,
        ..GeneratorParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_formula(&params, arity, family(nonmonotonic), read_once, &mut rng).unwrap()
}
