use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use brex_bench::config::{override_brex, parse_arities, AssignmentMode, CorpusKind, ExplainerSpec};
use brex_bench::corpus::build_corpus;
use brex_bench::experiment::{run_explainer, GroundTruth};
use brex_bench::io::{self, ExplanationDump};
use brex_bench::report::{emit_plot_data, report, GroupKey, Metric};
use brex_bench::{ExperimentConfig, FamilySelection};
use brex_core::brex::derive_seed;
use brex_core::formula::{enumerate_assignments, parse_with_width, render, sample_assignments};
use brex_core::ground_truth::BruteForceOptions;
use brex_core::metrics::{jsd, normalize, normalize_ground_truth, topk_perfect_overlap};
use brex_core::{Assignment, Formula};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ground-truth responsibility and explainer benchmarks for Boolean formulae.
#[derive(Parser)]
#[command(name = "brex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SeedArg {
    #[arg(long, env = "BREX_SEED", default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Clone, Default)]
struct CorpusArgs {
    /// Input width.
    #[arg(long)]
    width: Option<usize>,
    /// Arities, e.g. `3..10` or `3,5,7`.
    #[arg(long)]
    arities: Option<String>,
    /// monotonic, nonmonotonic or both.
    #[arg(long)]
    family: Option<String>,
    /// Formulae per family and arity.
    #[arg(long)]
    formulae: Option<usize>,
    /// Each variable occurs once (default).
    #[arg(long, overrides_with = "general")]
    read_once: bool,
    /// Variables may repeat.
    #[arg(long, overrides_with = "read_once")]
    general: bool,
}

#[derive(Args, Clone, Default)]
struct BrexArgs {
    /// Blocks per partition.
    #[arg(long)]
    blocks: Option<usize>,
    /// Restarts per explanation.
    #[arg(long)]
    restarts: Option<usize>,
    /// Oracle-call budget per explanation.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random formula corpus.
    Gen {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        seed: SeedArg,
        /// Output file (stdout by default).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Dump exact responsibilities as CSV.
    Truth {
        /// Corpus file written by `gen`.
        #[arg(long, conflicts_with = "formula")]
        corpus: Option<PathBuf>,
        /// A single formula.
        #[arg(long)]
        formula: Option<String>,
        /// Width for `--formula`.
        #[arg(long, default_value_t = 12)]
        width: usize,
        /// Sample this many assignments per formula instead of all.
        #[arg(long)]
        sample: Option<usize>,
        /// Enumerate every input position, not only the used variables.
        #[arg(long)]
        paper_faithful: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Explain one input with one or more explainers; prints JSON.
    Explain {
        #[arg(long)]
        formula: String,
        /// Bitstring such as `0101`; its length is the input width.
        #[arg(long)]
        assignment: String,
        #[arg(long, default_value = "brex")]
        explainers: String,
        #[command(flatten)]
        brex: BrexArgs,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark and write results, reports and a manifest.
    Bench {
        /// paper-jsd or paper-topk.
        #[arg(long, default_value = "paper-jsd")]
        preset: String,
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Sample this many assignments per formula instead of all.
        #[arg(long)]
        sample: Option<usize>,
        /// Enumerate every input position, not only the used variables.
        #[arg(long)]
        paper_faithful: bool,
        /// Comma-separated explainer ids.
        #[arg(long)]
        explainers: Option<String>,
        #[command(flatten)]
        brex: BrexArgs,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Record wall time per explanation.
        #[arg(long)]
        timing: bool,
        /// Do not print the report tables.
        #[arg(long)]
        quiet: bool,
    },
    /// Rebuild report tables and plot data from a results file.
    Report {
        /// Directory holding `results.csv`; reports are written next to it.
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Read results from this file instead.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Comma-separated grouping keys.
        #[arg(long, default_value = "explainer,family,arity")]
        group_by: String,
        #[command(flatten)]
        seed: SeedArg,
    },
}

fn apply_corpus(config: &mut ExperimentConfig, args: &CorpusArgs) -> Result<()> {
    if let Some(w) = args.width {
        config.width = w;
    }
    if let Some(a) = &args.arities {
        config.arities = parse_arities(a)?;
    }
    if let Some(f) = &args.family {
        config.family = f.parse::<FamilySelection>()?;
    }
    if let Some(n) = args.formulae {
        config.formulae_per_arity = n;
    }
    if args.general {
        config.read_once = false;
    } else if args.read_once {
        config.read_once = true;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(corpus: &CorpusArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let mut config = ExperimentConfig {
        seed,
        ..ExperimentConfig::paper_jsd()
    };
    apply_corpus(&mut config, corpus)?;
    let entries = build_corpus(&config)?;
    emit(out, &io::corpus_to_string(config.width, entries.iter().map(|e| &e.formula)))
}

fn truth_assignments(
    formula: &Formula,
    width: usize,
    sample: Option<usize>,
    paper_faithful: bool,
    seed: u64,
) -> Result<Vec<Assignment>> {
    let used = formula.meta().used_vars;
    let positions = (!paper_faithful).then_some(used.as_slice());
    Ok(match sample {
        None => enumerate_assignments(width, positions)?.collect(),
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_assignments(width, positions, n, &mut rng)?
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn truth(
    corpus: Option<&Path>,
    formula: Option<&str>,
    width: usize,
    sample: Option<usize>,
    paper_faithful: bool,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let (width, formulae) = match (corpus, formula) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            io::parse_corpus(&text)?
        }
        (None, Some(f)) => (width, vec![parse_with_width(f, width)?]),
        (None, None) => bail!("give --corpus or --formula"),
    };
    let options = BruteForceOptions::default();
    let mut rows = Vec::new();
    for (i, f) in formulae.iter().enumerate() {
        let id = format!("f{i:03}");
        let truth = GroundTruth::new(f, &options)?;
        let xs = truth_assignments(f, width, sample, paper_faithful, derive_seed(seed, i as u64))?;
        for x in &xs {
            rows.extend(io::ground_truth_rows(&id, x, &truth.at(x)?));
        }
    }
    let mut buf = Vec::new();
    io::write_ground_truth(&mut buf, &rows)?;
    emit(out, std::str::from_utf8(&buf)?)
}

fn explain(
    formula: &str,
    assignment: &str,
    explainers: &str,
    brex: &BrexArgs,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let x: Assignment = assignment.parse()?;
    let f = parse_with_width(formula, x.width())?;
    let mut specs = ExplainerSpec::parse_list(explainers)?;
    override_brex(&mut specs, brex.blocks, brex.restarts, brex.budget);
    let gt = GroundTruth::new(&f, &BruteForceOptions::default())?.at(&x)?;
    let target = normalize_ground_truth(&gt);
    let used = f.meta().used_vars;
    let mut dumps = Vec::new();
    for spec in &specs {
        let result = run_explainer(spec, &f, &x, Some(&used), seed)?;
        dumps.push(ExplanationDump {
            formula: render(&f),
            assignment: x.to_bitstring(),
            explainer: spec.id().to_string(),
            jsd: jsd(&normalize(&result.scores)?, &target)?,
            topk_perfect: topk_perfect_overlap(&result.scores, &gt)?,
            scores: result.scores,
            oracle_calls: result.oracle_calls,
            ground_truth: gt.values().iter().map(|r| r.to_string()).collect(),
        });
    }
    emit(out, &(serde_json::to_string_pretty(&dumps)? + "\n"))
}

#[allow(clippy::too_many_arguments)]
fn bench(
    preset: &str,
    corpus: &CorpusArgs,
    sample: Option<usize>,
    paper_faithful: bool,
    explainers: Option<&str>,
    brex: &BrexArgs,
    seed: u64,
    out_dir: &Path,
    timing: bool,
    quiet: bool,
) -> Result<()> {
    let mut config = ExperimentConfig::preset(preset)?;
    config.seed = seed;
    apply_corpus(&mut config, corpus)?;
    if config.corpus == CorpusKind::FixedStructure && corpus.formulae.is_some() {
        bail!("--formulae does not apply to the fixed-structure preset");
    }
    if let Some(n) = sample {
        config.assignments = AssignmentMode::Sample(n);
    }
    config.paper_faithful |= paper_faithful;
    if let Some(e) = explainers {
        config.explainers = ExplainerSpec::parse_list(e)?;
    }
    config.set_brex(brex.blocks, brex.restarts, brex.budget);
    config.timing = timing;
    config.validate()?;

    let records = brex_bench::run_experiment(&config)?;
    let table = brex_bench::write_outputs(out_dir, &config, &records)?;
    if !quiet {
        println!("{}", table.render_text(Metric::Jsd));
        println!("{}", table.render_text(Metric::TopK));
    }
    eprintln!("{} records written to {}", records.len(), out_dir.display());
    Ok(())
}

fn report_cmd(out_dir: &Path, results: Option<&Path>, group_by: &str) -> Result<()> {
    let path = results
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out_dir.join(brex_bench::RESULTS_FILE));
    let records = io::read_results(&path).with_context(|| format!("reading {}", path.display()))?;
    let keys: Vec<GroupKey> = group_by
        .split(',')
        .map(|k| k.trim().parse())
        .collect::<Result<_, _>>()?;
    let table = report(&records, &keys)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(brex_bench::REPORT_JSD_FILE), table.to_csv(Metric::Jsd)?)?;
    fs::write(out_dir.join(brex_bench::REPORT_TOPK_FILE), table.to_csv(Metric::TopK)?)?;
    fs::write(out_dir.join(brex_bench::PLOT_DATA_FILE), emit_plot_data(&table)?)?;
    println!("{}", table.render_text(Metric::Jsd));
    println!("{}", table.render_text(Metric::TopK));
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { corpus, seed, out } => gen(&corpus, seed.seed, out.as_deref()),
        Command::Truth {
            corpus,
            formula,
            width,
            sample,
            paper_faithful,
            seed,
            out,
        } => truth(
            corpus.as_deref(),
            formula.as_deref(),
            width,
            sample,
            paper_faithful,
            seed.seed,
            out.as_deref(),
        ),
        Command::Explain {
            formula,
            assignment,
            explainers,
            brex,
            seed,
            out,
        } => explain(&formula, &assignment, &explainers, &brex, seed.seed, out.as_deref()),
        Command::Bench {
            preset,
            corpus,
            sample,
            paper_faithful,
            explainers,
            brex,
            seed,
            out_dir,
            timing,
            quiet,
        } => bench(
            &preset,
            &corpus,
            sample,
            paper_faithful,
            explainers.as_deref(),
            &brex,
            seed.seed,
            &out_dir,
            timing,
            quiet,
        ),
        Command::Report {
            out_dir,
            results,
            group_by,
            seed: _,
        } => report_cmd(&out_dir, results.as_deref(), &group_by),
    }
}
