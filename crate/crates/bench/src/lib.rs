//! Benchmark harness for responsibility explainers: corpus generation,
//! ground truth, explainer runs, aggregation and the on-disk formats used by
//! the `brex` command line.

pub mod config;
pub mod corpus;
pub mod experiment;
pub mod io;
pub mod report;

use std::collections::BTreeMap;
use std::path::Path;

pub use config::{AssignmentMode, ExperimentConfig, ExplainerSpec, FamilySelection};
pub use experiment::{run_experiment, ResultRecord};
pub use report::{emit_plot_data, report, GroupKey, Metric, ReportTable};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),
    #[error("unknown explainer `{0}`")]
    UnknownExplainer(String),
    #[error("no records to report")]
    EmptyRecords,
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    GroundTruth(#[from] brex_core::ground_truth::GroundTruthError),
    #[error(transparent)]
    Brex(#[from] brex_core::brex::BrexError),
    #[error(transparent)]
    Baseline(#[from] brex_core::baselines::BaselineError),
    #[error(transparent)]
    Metric(#[from] brex_core::metrics::MetricError),
    #[error(transparent)]
    Generate(#[from] brex_core::formula::GenerateError),
    #[error(transparent)]
    Assignment(#[from] brex_core::formula::AssignmentError),
    #[error(transparent)]
    Parse(#[from] brex_core::formula::ParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Names of the files [`write_outputs`] produces.
pub const RESULTS_FILE: &str = "results.csv";
pub const REPORT_JSD_FILE: &str = "report_jsd.csv";
pub const REPORT_TOPK_FILE: &str = "report_topk.csv";
pub const PLOT_DATA_FILE: &str = "plot_data.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes results, both report tables, plot data and the manifest into
/// `dir`. Returns the report table.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    records: &[ResultRecord],
) -> Result<ReportTable, BenchError> {
    std::fs::create_dir_all(dir)?;
    let mut files = BTreeMap::new();
    io::write_results(&dir.join(RESULTS_FILE), records)?;
    files.insert(
        RESULTS_FILE.to_string(),
        io::sha256_hex(&std::fs::read(dir.join(RESULTS_FILE))?),
    );
    let table = report(records, &report::DEFAULT_GROUPING)?;
    for (name, text) in [
        (REPORT_JSD_FILE, table.to_csv(Metric::Jsd)?),
        (REPORT_TOPK_FILE, table.to_csv(Metric::TopK)?),
        (PLOT_DATA_FILE, emit_plot_data(&table)?),
    ] {
        files.insert(name.to_string(), io::write_hashed(dir, name, text.as_bytes())?);
    }
    let manifest = io::Manifest::new(config, records.len(), files);
    std::fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(table)
}
