use std::time::Instant;

use brex_core::baselines::{random_attribution, shapley_exact, shapley_sampled};
use brex_core::brex::{brex_explain, derive_seed};
use brex_core::formula::{enumerate_assignments, sample_assignments};
use brex_core::ground_truth::{responsibility_read_once, BruteForceOptions, TruthTable};
use brex_core::metrics::{jsd, normalize, normalize_ground_truth, topk_perfect_overlap};
use brex_core::{Assignment, Formula, FormulaOracle, Oracle, ResponsibilityMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AssignmentMode, ExperimentConfig, ExplainerSpec};
use crate::corpus::{build_corpus, CorpusEntry};
use crate::BenchError;

/// One explainer run on one assignment of one formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub formula_id: String,
    pub family: String,
    pub arity: usize,
    pub assignment: String,
    pub explainer_id: String,
    pub jsd: f64,
    pub topk_perfect: bool,
    pub oracle_calls: u64,
    pub wall_time_us: u64,
}

/// Scores produced by an explainer and the oracle calls it spent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainerOutput {
    pub scores: Vec<f64>,
    pub oracle_calls: u64,
}

fn explainer_stream(spec: &ExplainerSpec) -> u64 {
    match spec {
        ExplainerSpec::Brex(_) => 1,
        ExplainerSpec::ShapleyExact { .. } => 2,
        ExplainerSpec::ShapleySampled { .. } => 3,
        ExplainerSpec::Random => 4,
    }
}

/// Runs one explainer on `x`. The Shapley games are played over `players`
/// (all positions when `None`).
pub fn run_explainer(
    spec: &ExplainerSpec,
    formula: &Formula,
    x: &Assignment,
    players: Option<&[usize]>,
    seed: u64,
) -> Result<ExplainerOutput, BenchError> {
    let seed = derive_seed(seed, explainer_stream(spec));
    let mut oracle = FormulaOracle::new(formula);
    let scores = match spec {
        ExplainerSpec::Brex(params) => {
            brex_explain(&mut oracle, x, &params.to_config(seed))?
                .estimate
                .into_vec()
        }
        ExplainerSpec::ShapleyExact { payoff } => {
            shapley_exact(&mut oracle, x, players, *payoff)?.into_vec()
        }
        ExplainerSpec::ShapleySampled {
            permutations,
            payoff,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            shapley_sampled(&mut oracle, x, players, *payoff, *permutations, &mut rng)?.into_vec()
        }
        ExplainerSpec::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_attribution(x.width(), &mut rng).into_vec()
        }
    };
    Ok(ExplainerOutput {
        scores,
        oracle_calls: oracle.calls(),
    })
}

/// Exact responsibility for the assignments of one formula, with the truth
/// table built once per formula when brute force is needed.
pub struct GroundTruth<'f> {
    formula: &'f Formula,
    table: Option<TruthTable>,
    relax: bool,
}

impl<'f> GroundTruth<'f> {
    pub fn new(formula: &'f Formula, options: &BruteForceOptions) -> Result<Self, BenchError> {
        let table = if formula.meta().read_once {
            None
        } else {
            Some(TruthTable::new(formula, options)?)
        };
        Ok(GroundTruth {
            formula,
            table,
            relax: options.relax_subset_condition,
        })
    }

    pub fn at(&self, x: &Assignment) -> Result<ResponsibilityMap, BenchError> {
        match &self.table {
            None => Ok(responsibility_read_once(self.formula, x)?),
            Some(t) => {
                if let Some(&i) = self.formula.meta().used_vars.iter().find(|&&i| {
                    x.get(i).is_none_or(|v| !v.is_assigned())
                }) {
                    return Err(BenchError::Config(format!(
                        "x{} is not a Boolean input position",
                        i + 1
                    )));
                }
                Ok(t.responsibility(x.true_bits(), x.width(), self.relax))
            }
        }
    }
}

/// Assignments evaluated for the formula at position `ordinal` of the
/// corpus.
pub fn assignments_for(
    config: &ExperimentConfig,
    formula: &Formula,
    ordinal: usize,
) -> Result<Vec<Assignment>, BenchError> {
    let used = formula.meta().used_vars;
    let positions = if config.paper_faithful {
        None
    } else {
        Some(used.as_slice())
    };
    Ok(match config.assignments {
        AssignmentMode::Exhaustive => enumerate_assignments(config.width, positions)?.collect(),
        AssignmentMode::Sample(n) => {
            let seed = derive_seed(derive_seed(config.seed, 0x00A5_516E), ordinal as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_assignments(config.width, positions, n, &mut rng)?
        }
    })
}

/// Every configured explainer on every selected assignment of every corpus
/// formula, sorted by formula, assignment and explainer.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>, BenchError> {
    let corpus = build_corpus(config)?;
    run_on_corpus(config, &corpus)
}

pub fn run_on_corpus(
    config: &ExperimentConfig,
    corpus: &[CorpusEntry],
) -> Result<Vec<ResultRecord>, BenchError> {
    config.validate()?;
    let options = BruteForceOptions {
        guard: config.brute_force_guard,
        ..BruteForceOptions::default()
    };
    let per_formula: Vec<Vec<ResultRecord>> = corpus
        .par_iter()
        .enumerate()
        .map(|(ordinal, entry)| {
            let truth = GroundTruth::new(&entry.formula, &options)?;
            let assignments = assignments_for(config, &entry.formula, ordinal)?;
            let used = entry.formula.meta().used_vars;
            let formula_seed = derive_seed(config.seed, 1 << 40 | ordinal as u64);
            let rows: Result<Vec<Vec<ResultRecord>>, BenchError> = assignments
                .par_iter()
                .map(|x| {
                    let gt = truth.at(x)?;
                    let target = normalize_ground_truth(&gt);
                    let seed = derive_seed(formula_seed, x.true_bits());
                    config
                        .explainers
                        .iter()
                        .map(|spec| {
                            let start = config.timing.then(Instant::now);
                            let out = run_explainer(spec, &entry.formula, x, Some(&used), seed)?;
                            let wall_time_us =
                                start.map_or(0, |s| s.elapsed().as_micros() as u64);
                            Ok(ResultRecord {
                                formula_id: entry.id.clone(),
                                family: entry.family.name().to_string(),
                                arity: entry.arity,
                                assignment: x.to_bitstring(),
                                explainer_id: spec.id().to_string(),
                                jsd: jsd(&normalize(&out.scores)?, &target)?,
                                topk_perfect: topk_perfect_overlap(&out.scores, &gt)?,
                                oracle_calls: out.oracle_calls,
                                wall_time_us,
                            })
                        })
                        .collect()
                })
                .collect();
            Ok(rows?.into_iter().flatten().collect())
        })
        .collect::<Result<_, BenchError>>()?;
    let mut records: Vec<ResultRecord> = per_formula.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        (&a.formula_id, &a.assignment, &a.explainer_id).cmp(&(
            &b.formula_id,
            &b.assignment,
            &b.explainer_id,
        ))
    });
    Ok(records)
}
