//! File formats: formula corpora, result and ground-truth CSVs, explanation
//! JSON and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use brex_core::formula::{parse_with_width, render};
use brex_core::{Assignment, Formula, ResponsibilityMap};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::experiment::ResultRecord;
use crate::BenchError;

/// Corpus text: a `width=<n>` header, then one formula per line.
pub fn corpus_to_string<'a>(width: usize, formulae: impl IntoIterator<Item = &'a Formula>) -> String {
    let mut out = format!("width={width}\n");
    for f in formulae {
        out.push_str(&render(f));
        out.push('\n');
    }
    out
}

/// Reads corpus text. Blank lines and lines starting with `#` are skipped.
pub fn parse_corpus(text: &str) -> Result<(usize, Vec<Formula>), BenchError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| BenchError::Format("empty corpus".into()))?;
    let width: usize = header
        .strip_prefix("width=")
        .and_then(|w| w.trim().parse().ok())
        .ok_or_else(|| BenchError::Format(format!("bad corpus header `{header}`")))?;
    let formulae = lines
        .map(|(n, l)| {
            parse_with_width(l, width)
                .map_err(|e| BenchError::Format(format!("line {}: {e}", n + 1)))
        })
        .collect::<Result<_, _>>()?;
    Ok((width, formulae))
}

pub fn write_results(path: &Path, records: &[ResultRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub formula_id: String,
    pub assignment: String,
    pub var_index: usize,
    pub responsibility_num: u32,
    pub responsibility_den: u32,
}

pub fn ground_truth_rows(formula_id: &str, x: &Assignment, map: &ResponsibilityMap) -> Vec<GroundTruthRow> {
    let assignment = x.to_bitstring();
    map.values()
        .iter()
        .enumerate()
        .map(|(i, r)| GroundTruthRow {
            formula_id: formula_id.to_string(),
            assignment: assignment.clone(),
            var_index: i,
            responsibility_num: r.numerator(),
            responsibility_den: r.denominator(),
        })
        .collect()
}

pub fn write_ground_truth<W: Write>(out: W, rows: &[GroundTruthRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One explainer's output on one input, as written by `brex explain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationDump {
    pub formula: String,
    pub assignment: String,
    pub explainer: String,
    pub scores: Vec<f64>,
    pub oracle_calls: u64,
    /// Exact responsibilities as `num/den` strings.
    pub ground_truth: Vec<String>,
    pub jsd: f64,
    pub topk_perfect: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub records: usize,
    /// SHA-256 of each output file.
    pub files: BTreeMap<String, String>,
    /// SHA-256 over the sorted `name hash` lines of `files`.
    pub content_hash: String,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, records: usize, files: BTreeMap<String, String>) -> Self {
        let listing: String = files.iter().map(|(n, h)| format!("{h}  {n}\n")).collect();
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
            records,
            content_hash: sha256_hex(listing.as_bytes()),
            files,
        }
    }
}

/// Writes `contents` to `dir/name` and returns its SHA-256.
pub fn write_hashed(dir: &Path, name: &str, contents: &[u8]) -> Result<String, BenchError> {
    fs::write(dir.join(name), contents)?;
    Ok(sha256_hex(contents))
}

#[cfg(test)]
mod tests {
    use super::*;
    use brex_core::formula::parse;

    #[test]
    fn corpus_round_trip() {
        let fs = [parse("x1 & !x3").unwrap(), parse("(x2 ^ x4) | x1").unwrap()];
        let text = corpus_to_string(6, &fs);
        assert!(text.starts_with("width=6\n"));
        let (w, back) = parse_corpus(&text).unwrap();
        assert_eq!(w, 6);
        assert_eq!(back, fs);
    }

    #[test]
    fn corpus_errors() {
        assert!(parse_corpus("").is_err());
        assert!(parse_corpus("x1 & x2\n").is_err());
        assert!(parse_corpus("width=2\nx3\n").is_err());
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn ground_truth_rows_cover_every_position() {
        let f = parse("x1 & (x2 & x3)").unwrap();
        let x: Assignment = "0000".parse().unwrap();
        let map = brex_core::ground_truth::responsibility_read_once(&f, &x).unwrap();
        let rows = ground_truth_rows("f", &x, &map);
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].responsibility_num, rows[0].responsibility_den), (1, 3));
        assert_eq!((rows[3].responsibility_num, rows[3].responsibility_den), (0, 1));
        let mut buf = Vec::new();
        write_ground_truth(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "formula_id,assignment,var_index,responsibility_num,responsibility_den"
        );
    }
}
