//! Exact causal responsibility of variables in Boolean formulae, the B-ReX
//! black-box explainer, Shapley baselines and the metrics used to compare
//! attribution maps against ground truth.
//!
//! The crate is `no_std` and only needs `alloc`. IO, the benchmark harness and
//! the command line live in the `brex-bench` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod baselines;
pub mod brex;
pub mod formula;
pub mod ground_truth;
pub mod metrics;

/// Largest supported input width. Assignments are packed into `u64` masks.
pub const MAX_WIDTH: usize = 64;

pub use baselines::{AttributionMap, Payoff};
pub use brex::{BrexConfig, FormulaOracle, Label, Oracle, ResponsibilityEstimate};
pub use formula::{Assignment, Family, Formula, FormulaMeta, Operator, TruthValue};
pub use ground_truth::{CauseKind, DepsMap, Responsibility, ResponsibilityMap};
pub use metrics::{AggregateStat, Distribution};
