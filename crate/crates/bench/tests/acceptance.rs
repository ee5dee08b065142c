//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use brex_bench::corpus::{random_corpus, CorpusEntry};
use brex_bench::report::{parse_report_csv, ReportCsvRow};
use brex_core::baselines::{shapley_exact, CoalitionPayoff, MaskingGame};
use brex_core::brex::brex_explain;
use brex_core::formula::{enumerate_assignments, parse};
use brex_core::ground_truth::{
    depends, min_flips_brute, responsibility_brute_force, responsibility_read_once,
    BruteForceOptions, Responsibility,
};
use brex_core::metrics::{jsd, normalize};
use brex_core::{Assignment, BrexConfig, Family, Formula, FormulaOracle, Label, Payoff, ResponsibilityMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn verdict(n: u32, what: &str, failures: &[String]) {
    let mut err = std::io::stderr().lock();
    if failures.is_empty() {
        let _ = writeln!(err, "PASS criterion {n}: {what}");
        return;
    }
    let _ = writeln!(err, "FAIL criterion {n}: {what}");
    for f in failures.iter().take(20) {
        let _ = writeln!(err, "  {f}");
    }
    drop(err);
    panic!("criterion {n} failed with {} violation(s)", failures.len());
}

fn read_once_corpus() -> Vec<CorpusEntry> {
    let arities: Vec<usize> = (3..=10).collect();
    random_corpus(12, &arities, &[Family::Monotonic, Family::Nonmonotonic], 32, true, 2024).unwrap()
}

fn used_assignments(f: &Formula, width: usize) -> Vec<Assignment> {
    enumerate_assignments(width, Some(&f.meta().used_vars)).unwrap().collect()
}

#[test]
fn read_once_pass_equals_brute_force() {
    let corpus = read_once_corpus();
    assert!(corpus.len() >= 500);
    let options = &BruteForceOptions::default();
    let failures: Vec<String> = corpus
        .par_iter()
        .flat_map_iter(|e| {
            used_assignments(&e.formula, 12).into_iter().filter_map(move |x| {
                let fast = responsibility_read_once(&e.formula, &x).unwrap();
                let slow = responsibility_brute_force(&e.formula, &x, options).unwrap();
                (fast != slow).then(|| format!("{} at {}", e.id, x.to_bitstring()))
            })
        })
        .collect();
    verdict(
        1,
        &format!("read-once responsibility equals brute force on {} formulae", corpus.len()),
        &failures,
    );
}

#[test]
fn root_dependency_equals_minimum_flips() {
    let corpus = read_once_corpus();
    let options = &BruteForceOptions::default();
    let failures: Vec<String> = corpus
        .par_iter()
        .flat_map_iter(|e| {
            used_assignments(&e.formula, 12).into_iter().filter_map(move |x| {
                let root = depends(&e.formula, &x).unwrap().root();
                let flips = min_flips_brute(&e.formula, &x, options).unwrap();
                (root != flips).then(|| format!("{} at {}: {root} vs {flips}", e.id, x.to_bitstring()))
            })
        })
        .collect();
    verdict(2, "root dependency equals the minimum flip count", &failures);
}

#[test]
fn nested_conjunction_example() {
    let f = parse("x1 & (x2 & x3)").unwrap();
    let x: Assignment = "000".parse().unwrap();
    let mut failures = Vec::new();
    let deps = depends(&f, &x).unwrap();
    if deps.as_slice() != [3, 1, 2, 1, 1] {
        failures.push(format!("deps {:?}", deps.as_slice()));
    }
    let third = Responsibility::from_witness_size(2);
    for map in [
        responsibility_read_once(&f, &x).unwrap(),
        responsibility_brute_force(&f, &x, &BruteForceOptions::default()).unwrap(),
    ] {
        if map.values() != [third; 3] {
            failures.push(format!("responsibility {:?}", map.values()));
        }
    }
    verdict(3, "x1 & (x2 & x3) under 000: inner gate 2, responsibilities 1/3", &failures);
}

/// Responsibility under masking: the smallest set of other used variables
/// whose masking (and that of each of its subsets) keeps the label, while
/// also masking the target changes it.
fn masking_responsibility(f: &Formula, x: &Assignment) -> ResponsibilityMap {
    let used = f.meta().used_vars;
    let n = used.len();
    let full = (1u64 << x.width()) - 1;
    let label = |masked: u64| {
        let drop = (0..n).filter(|j| masked >> j & 1 == 1).fold(0u64, |acc, j| acc | 1 << used[j]);
        Label::from(f.evaluate_k3(&x.mask_bits(full & !drop)))
    };
    let reference = label(0);
    let mut out = vec![Responsibility::ZERO; x.width()];
    for (t, &var) in used.iter().enumerate() {
        let mut best: Option<u32> = None;
        for m in 0u64..1 << n {
            if m >> t & 1 == 1 {
                continue;
            }
            let size = m.count_ones();
            if best.is_some_and(|b| size >= b) {
                continue;
            }
            let mut sub = m;
            let preserved = loop {
                if label(sub) != reference {
                    break false;
                }
                if sub == 0 {
                    break true;
                }
                sub = (sub - 1) & m;
            };
            if preserved && label(m | 1 << t) != reference {
                best = Some(size);
            }
        }
        if let Some(k) = best {
            out[var] = Responsibility::from_witness_size(k);
        }
    }
    ResponsibilityMap::from_values(out)
}

#[test]
fn singleton_brex_equals_masking_responsibility() {
    let width = 8;
    let mut formulae = Vec::new();
    for read_once in [true, false] {
        let arities: Vec<usize> = (1..=6).collect();
        let families = [Family::Monotonic, Family::Nonmonotonic];
        formulae.extend(random_corpus(width, &arities, &families, 12, read_once, 77).unwrap());
    }
    let config = BrexConfig::singleton_blocks(width);
    let failures: Vec<String> = formulae
        .par_iter()
        .flat_map_iter(|e| {
            let config = config.clone();
            used_assignments(&e.formula, width).into_iter().filter_map(move |x| {
                let expected = masking_responsibility(&e.formula, &x).to_f64();
                let got = brex_explain(&mut FormulaOracle::new(&e.formula), &x, &config)
                    .unwrap()
                    .estimate
                    .into_vec();
                (got != expected).then(|| format!("{} at {}: {got:?} vs {expected:?}", e.id, x.to_bitstring()))
            })
        })
        .collect();
    verdict(
        4,
        &format!("singleton-block B-ReX equals masking responsibility on {} formulae", formulae.len()),
        &failures,
    );
}

fn run_bench(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_brex"))
        .arg("bench")
        .args(args)
        .args(["--quiet", "--out-dir"])
        .arg(dir)
        .env_remove("BREX_SEED")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn jsd_run() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap().keep();
        run_bench(&dir, &["--preset", "paper-jsd", "--seed", "42"]);
        dir
    })
}

type Means = BTreeMap<(String, String, usize), f64>;

fn means(path: &Path) -> Means {
    parse_report_csv(&std::fs::read_to_string(path).unwrap())
        .unwrap()
        .into_iter()
        .map(|r: ReportCsvRow| ((r.explainer.unwrap(), r.family.unwrap(), r.arity.unwrap()), r.mean))
        .collect()
}

#[test]
fn brex_beats_exact_shapley_on_jsd() {
    let m = means(&jsd_run().join("report_jsd.csv"));
    let mut failures = Vec::new();
    for family in ["monotonic", "nonmonotonic"] {
        for arity in 3..=10 {
            let key = |e: &str| (e.to_string(), family.to_string(), arity);
            let (b, s) = (m[&key("brex")], m[&key("shapley_exact")]);
            if b >= s {
                failures.push(format!("{family} arity {arity}: brex {b:.4} >= shapley_exact {s:.4}"));
            }
        }
    }
    for (family, bound) in [("nonmonotonic", 0.15), ("monotonic", 0.12)] {
        let v = m[&("brex".to_string(), family.to_string(), 10)];
        if v > bound {
            failures.push(format!("{family} arity 10: brex {v:.4} > {bound}"));
        }
    }
    verdict(5, "B-ReX JSD below exact Shapley at every arity and within bounds at arity 10", &failures);
}

#[test]
fn topk_pattern() {
    let dir = tempfile::tempdir().unwrap();
    run_bench(dir.path(), &["--preset", "paper-topk", "--seed", "42"]);
    let m = means(&dir.path().join("report_topk.csv"));
    let mut failures = Vec::new();
    for ((e, family, arity), &b) in &m {
        if e != "brex" || family != "monotonic" {
            continue;
        }
        let s = m[&("shapley_exact".to_string(), family.clone(), *arity)];
        if b < s {
            failures.push(format!("monotonic arity {arity}: brex {b:.3} < shapley_exact {s:.3}"));
        }
    }
    let records = brex_bench::io::read_results(&dir.path().join("results.csv")).unwrap();
    let mut pooled: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
    for r in &records {
        let entry = pooled.entry((r.explainer_id.as_str(), r.family.as_str())).or_default();
        entry.0 += f64::from(u8::from(r.topk_perfect));
        entry.1 += 1;
    }
    let mean = |e: &str, f: &str| pooled[&(e, f)].0 / pooled[&(e, f)].1 as f64;
    for e in ["brex", "random", "shapley_exact", "shapley_sampled"] {
        let (mono, non) = (mean(e, "monotonic"), mean(e, "nonmonotonic"));
        if non >= mono {
            failures.push(format!("{e}: nonmonotonic {non:.3} >= monotonic {mono:.3}"));
        }
    }
    verdict(6, "top-k: B-ReX >= exact Shapley on monotonic, non-monotonic below monotonic", &failures);
}

#[test]
fn metric_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for case in 0..10_000 {
        let len = rng.gen_range(1..=16);
        let p: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let q: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let (np, nq) = (normalize(&p).unwrap(), normalize(&q).unwrap());
        let (pq, qp) = (jsd(&np, &nq).unwrap(), jsd(&nq, &np).unwrap());
        if (pq - qp).abs() > 1e-12 || !(0.0..=1.0).contains(&pq) || jsd(&np, &np).unwrap().abs() > 1e-12 {
            failures.push(format!("jsd case {case}: {pq} / {qp}"));
        }
        let c = rng.gen_range(1e-3..1e3);
        let scaled: Vec<f64> = p.iter().map(|v| v * c).collect();
        let ns = normalize(&scaled).unwrap();
        if np.values().iter().zip(ns.values()).any(|(a, b)| (a - b).abs() > 1e-12) {
            failures.push(format!("normalize case {case} not scale invariant"));
        }
    }
    let arities: Vec<usize> = (2..=8).collect();
    let corpus = random_corpus(8, &arities, &[Family::Monotonic, Family::Nonmonotonic], 4, false, 9).unwrap();
    for (i, e) in corpus.iter().take(100).enumerate() {
        let x = Assignment::from_bits(8, rng.gen_range(0..256));
        let payoff = if i % 2 == 0 { Payoff::Preservation } else { Payoff::CompletionExpectation };
        let phi = shapley_exact(&mut FormulaOracle::new(&e.formula), &x, None, payoff).unwrap();
        let mut oracle = FormulaOracle::new(&e.formula);
        let mut game = MaskingGame::new(&mut oracle, &x, None, payoff).unwrap();
        let gain = game.value(0xff) - game.value(0);
        let sum: f64 = phi.values().iter().sum();
        if (sum - gain).abs() > 1e-12 {
            failures.push(format!("{} at {}: sum {sum} vs {gain}", e.id, x.to_bitstring()));
        }
    }
    verdict(7, "JSD, normalize and Shapley efficiency properties", &failures);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let first = std::fs::read(jsd_run().join("results.csv")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_bench(dir.path(), &["--seed", "42"]);
    let second = std::fs::read(dir.path().join("results.csv")).unwrap();
    let failures = if first == second {
        Vec::new()
    } else {
        vec!["results.csv differs between runs".to_string()]
    };
    verdict(8, "two `bench --seed 42` runs write identical results.csv", &failures);
}
