use std::fmt;
use std::str::FromStr;

use brex_core::baselines::Payoff;
use brex_core::brex::BrexConfig;
use brex_core::Family;
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Which formula families a run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilySelection {
    Monotonic,
    Nonmonotonic,
    Both,
}

impl FamilySelection {
    pub fn families(self) -> &'static [Family] {
        match self {
            FamilySelection::Monotonic => &[Family::Monotonic],
            FamilySelection::Nonmonotonic => &[Family::Nonmonotonic],
            FamilySelection::Both => &[Family::Monotonic, Family::Nonmonotonic],
        }
    }
}

impl FromStr for FamilySelection {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" | "all" => Ok(FamilySelection::Both),
            other => match other.parse::<Family>() {
                Ok(Family::Monotonic) => Ok(FamilySelection::Monotonic),
                Ok(Family::Nonmonotonic) => Ok(FamilySelection::Nonmonotonic),
                Err(_) => Err(BenchError::Config(format!("unknown family `{s}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "count")]
pub enum AssignmentMode {
    Exhaustive,
    Sample(usize),
}

/// Where the formulae of a run come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    /// `formulae_per_arity` random formulae per family and arity.
    Random,
    /// One fixed chain per family and arity plus four small hand-written
    /// formulae.
    FixedStructure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrexParams {
    pub blocks: usize,
    pub restarts: usize,
    pub budget: Option<u64>,
    pub min_block_to_recurse: usize,
    pub max_depth: Option<usize>,
}

impl Default for BrexParams {
    fn default() -> Self {
        let d = BrexConfig::default();
        BrexParams {
            blocks: d.num_blocks,
            restarts: d.restarts,
            budget: d.call_budget,
            min_block_to_recurse: d.min_block_to_recurse,
            max_depth: d.max_depth,
        }
    }
}

impl BrexParams {
    pub fn to_config(&self, seed: u64) -> BrexConfig {
        BrexConfig {
            num_blocks: self.blocks,
            restarts: self.restarts,
            call_budget: self.budget,
            seed,
            min_block_to_recurse: self.min_block_to_recurse,
            max_depth: self.max_depth,
        }
    }
}

pub const DEFAULT_PERMUTATIONS: usize = 64;

/// Payoff of the Shapley baselines unless an id names another one.
pub const BASELINE_PAYOFF: Payoff = Payoff::CompletionExpectation;

/// An explainer together with its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ExplainerSpec {
    Brex(BrexParams),
    ShapleyExact {
        #[serde(with = "payoff_name")]
        payoff: Payoff,
    },
    ShapleySampled {
        permutations: usize,
        #[serde(with = "payoff_name")]
        payoff: Payoff,
    },
    Random,
}

impl ExplainerSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ExplainerSpec::Brex(_) => "brex",
            ExplainerSpec::ShapleyExact {
                payoff: Payoff::Preservation,
            } => "shapley_exact_preservation",
            ExplainerSpec::ShapleyExact { .. } => "shapley_exact",
            ExplainerSpec::ShapleySampled {
                payoff: Payoff::Preservation,
                ..
            } => "shapley_sampled_preservation",
            ExplainerSpec::ShapleySampled { .. } => "shapley_sampled",
            ExplainerSpec::Random => "random",
        }
    }

    pub fn all_default() -> Vec<ExplainerSpec> {
        ["brex", "shapley_exact", "shapley_sampled", "random"]
            .iter()
            .map(|id| id.parse().expect("known id"))
            .collect()
    }

    /// Parses a comma-separated list of explainer ids.
    pub fn parse_list(s: &str) -> Result<Vec<ExplainerSpec>, BenchError> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for ExplainerSpec {
    type Err = BenchError;

    /// An id, optionally followed by `:<payoff>` for the Shapley baselines,
    /// e.g. `shapley_exact:preservation`. The Shapley baselines default to
    /// [`BASELINE_PAYOFF`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || BenchError::UnknownExplainer(s.to_string());
        let (id, payoff) = match s.split_once(':') {
            Some((id, p)) => (id, Some(p.parse::<Payoff>().map_err(|_| unknown())?)),
            None => (s, None),
        };
        match id {
            "brex" if payoff.is_none() => Ok(ExplainerSpec::Brex(BrexParams::default())),
            "shapley_exact" => Ok(ExplainerSpec::ShapleyExact {
                payoff: payoff.unwrap_or(BASELINE_PAYOFF),
            }),
            "shapley_sampled" => Ok(ExplainerSpec::ShapleySampled {
                permutations: DEFAULT_PERMUTATIONS,
                payoff: payoff.unwrap_or(BASELINE_PAYOFF),
            }),
            "random" if payoff.is_none() => Ok(ExplainerSpec::Random),
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for ExplainerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

mod payoff_name {
    use brex_core::baselines::Payoff;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Payoff, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match p {
            Payoff::Preservation => "preservation",
            Payoff::CompletionExpectation => "completion",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Payoff, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub width: usize,
    pub arities: Vec<usize>,
    pub formulae_per_arity: usize,
    pub family: FamilySelection,
    pub read_once: bool,
    pub corpus: CorpusKind,
    pub assignments: AssignmentMode,
    /// Enumerate every position of the input, not just the used variables.
    pub paper_faithful: bool,
    pub explainers: Vec<ExplainerSpec>,
    pub seed: u64,
    /// Record per-explanation wall time; `wall_time_us` is 0 otherwise.
    pub timing: bool,
    pub brute_force_guard: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::paper_jsd()
    }
}

impl ExperimentConfig {
    /// Ten random read-once formulae per arity 3..=10 in both families, all
    /// assignments of the used variables, every explainer.
    pub fn paper_jsd() -> Self {
        ExperimentConfig {
            name: "paper-jsd".into(),
            width: 12,
            arities: (3..=10).collect(),
            formulae_per_arity: 10,
            family: FamilySelection::Both,
            read_once: true,
            corpus: CorpusKind::Random,
            assignments: AssignmentMode::Exhaustive,
            paper_faithful: false,
            explainers: ExplainerSpec::all_default(),
            seed: 42,
            timing: false,
            brute_force_guard: brex_core::ground_truth::DEFAULT_BRUTE_FORCE_GUARD,
        }
    }

    /// Fixed-structure chains of arity 3..=10 plus the small hand-written
    /// formulae, scored by top-k accuracy.
    pub fn paper_topk() -> Self {
        ExperimentConfig {
            name: "paper-topk".into(),
            corpus: CorpusKind::FixedStructure,
            formulae_per_arity: 1,
            ..ExperimentConfig::paper_jsd()
        }
    }

    pub fn preset(name: &str) -> Result<Self, BenchError> {
        match name {
            "paper-jsd" => Ok(ExperimentConfig::paper_jsd()),
            "paper-topk" => Ok(ExperimentConfig::paper_topk()),
            other => Err(BenchError::Config(format!("unknown preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.width == 0 || self.width > brex_core::MAX_WIDTH {
            return Err(BenchError::Config(format!("width {} is out of range", self.width)));
        }
        if self.arities.is_empty() {
            return Err(BenchError::Config("no arities given".into()));
        }
        if let Some(a) = self.arities.iter().find(|&&a| a == 0 || a > self.width) {
            return Err(BenchError::Config(format!(
                "arity {a} is outside 1..={}",
                self.width
            )));
        }
        if self.formulae_per_arity == 0 {
            return Err(BenchError::Config("formulae per arity must be at least 1".into()));
        }
        if self.explainers.is_empty() {
            return Err(BenchError::Config("no explainers given".into()));
        }
        if self.assignments == AssignmentMode::Sample(0) {
            return Err(BenchError::Config("sample size must be at least 1".into()));
        }
        for e in &self.explainers {
            match e {
                ExplainerSpec::Brex(p) if p.blocks < 2 || p.restarts == 0 || p.budget == Some(0) => {
                    return Err(BenchError::Config(
                        "brex needs at least 2 blocks, 1 restart and a positive budget".into(),
                    ));
                }
                ExplainerSpec::ShapleySampled { permutations: 0, .. } => {
                    return Err(BenchError::Config("shapley_sampled needs permutations".into()));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Applies the same B-ReX overrides to every `brex` explainer.
    pub fn set_brex(&mut self, blocks: Option<usize>, restarts: Option<usize>, budget: Option<u64>) {
        override_brex(&mut self.explainers, blocks, restarts, budget);
    }
}

pub fn override_brex(
    explainers: &mut [ExplainerSpec],
    blocks: Option<usize>,
    restarts: Option<usize>,
    budget: Option<u64>,
) {
    for e in explainers {
        if let ExplainerSpec::Brex(p) = e {
            if let Some(b) = blocks {
                p.blocks = b;
            }
            if let Some(r) = restarts {
                p.restarts = r;
            }
            if budget.is_some() {
                p.budget = budget;
            }
        }
    }
}

/// Parses `3..10`, `3..=10`, `3-10` or `3,5,7` into a list of arities.
pub fn parse_arities(s: &str) -> Result<Vec<usize>, BenchError> {
    let bad = || BenchError::Config(format!("cannot parse arities `{s}`"));
    let s = s.trim();
    let range = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'));
    if let Some((lo, hi)) = range {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}
