//! Command-line surface: `simulate`, `select` and `cv`.
//!
//! Exit codes: 0 on success, 2 on invalid arguments or input, 1 otherwise.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::dataset::{Dataset, FeatureKind};
use crate::error::{MintError, Result};
use crate::harness::{run_experiment, view_from_parts, ExperimentConfig, Method};
use crate::infotheory::default_bin_count;
use crate::io::{self, LoadOptions, MissingPolicy};
use crate::regression::{LambdaPolicy, DEFAULT_LAMBDA_GRID};
use crate::report::{
    self, CvConfig, CvDocument, InputConfig, RankedFeature, SelectConfig, SelectDocument,
    SelectResult, Timing, ToolInfo, FIRST_STEP_NOTE, REDUNDANCY_NOTE, SCHEMA_VERSION,
};
use crate::selection::{phi_score, select_greedy, Mode};
use crate::simulate::{self, SimCase, SimSpec};

pub const THREADS_ENV: &str = "MINT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mint",
    version,
    about = "Mutual-information feature selection for trait prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset.
    Simulate(SimulateArgs),
    /// Rank features on one training set.
    Select(SelectArgs),
    /// Cross-validate ridge on all features and on selected subsets.
    Cv(CvArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum CaseArg {
    One,
    Two,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    case: CaseArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_good: Option<usize>,
    #[arg(long)]
    good_noise_var: Option<f64>,
    #[arg(long)]
    n_bad: Option<usize>,
    #[arg(long)]
    bad_noise_var: Option<f64>,
    #[arg(long)]
    n_seeds: Option<usize>,
    #[arg(long)]
    seed_noise_var: Option<f64>,
    #[arg(long)]
    dups_per_seed: Option<usize>,
    #[arg(long)]
    dup_noise_var: Option<f64>,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Feature CSV: `sample_id,<feature_id>...`.
    #[arg(long)]
    genotypes: PathBuf,
    /// Trait CSV: `sample_id,value`.
    #[arg(long)]
    phenotype: PathBuf,
    #[arg(long, value_enum, default_value = "genotype")]
    feature_kind: FeatureKind,
    /// Replace NA cells by the column mode instead of failing.
    #[arg(long)]
    impute_mode: bool,
    /// Worker threads; falls back to MINT_THREADS. Never changes results.
    #[arg(long)]
    threads: Option<usize>,
}

impl InputArgs {
    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            kind: self.feature_kind,
            missing: if self.impute_mode {
                MissingPolicy::ImputeMode
            } else {
                MissingPolicy::Error
            },
        }
    }

    fn config(&self) -> InputConfig {
        let opts = self.load_options();
        InputConfig {
            genotypes: self.genotypes.clone(),
            phenotype: self.phenotype.clone(),
            feature_kind: opts.kind,
            missing: opts.missing,
        }
    }

    fn load(&self) -> Result<Dataset> {
        let features = io::load_genotypes(&self.genotypes, self.load_options())?;
        io::load_phenotype(&self.phenotype, features)
    }
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: Mode,
    #[arg(long)]
    n: usize,
    /// Unlabeled test-sample features, same columns as --genotypes.
    #[arg(long)]
    test_genotypes: Option<PathBuf>,
    /// Equal-frequency bins for the trait (and continuous features).
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated subset of all, mrmr, mint.
    #[arg(long, value_delimiter = ',', default_value = "all,mrmr,mint")]
    methods: Vec<Method>,
    /// Subset sizes: comma-separated integers or inclusive ranges `start..end:step`.
    #[arg(long, default_value = "100..500:100")]
    n_list: String,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    bins: Option<usize>,
    /// `gcv` for generalized cross-validation over 1e-3..1e4, or a fixed value.
    #[arg(long, default_value = "gcv")]
    lambda: String,
    #[arg(long)]
    out: PathBuf,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => run_simulate(args),
        Command::Select(args) => {
            let threads = resolve_threads(args.input.threads)?;
            with_pool(threads, || run_select(&args, threads))
        }
        Command::Cv(args) => {
            let threads = resolve_threads(args.input.threads)?;
            with_pool(threads, || run_cv(&args, threads))
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    let threads = match flag {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                MintError::invalid(format!("{THREADS_ENV}='{v}' is not a thread count"))
            })?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if threads == 0 {
        return Err(MintError::invalid("thread count must be at least 1"));
    }
    Ok(threads)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| MintError::Numerical(format!("cannot start thread pool: {e}")))?;
    pool.install(f)
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let mut case = match args.case {
        CaseArg::One => SimCase::one(),
        CaseArg::Two => SimCase::two(),
    };
    match &mut case {
        SimCase::One {
            n_good,
            good_noise_var,
            n_bad,
            bad_noise_var,
        } => {
            reject_flags(
                &[
                    ("--n-seeds", args.n_seeds.is_some()),
                    ("--seed-noise-var", args.seed_noise_var.is_some()),
                    ("--dups-per-seed", args.dups_per_seed.is_some()),
                    ("--dup-noise-var", args.dup_noise_var.is_some()),
                ],
                "one",
            )?;
            override_with(n_good, args.n_good);
            override_with(good_noise_var, args.good_noise_var);
            override_with(n_bad, args.n_bad);
            override_with(bad_noise_var, args.bad_noise_var);
        }
        SimCase::Two {
            n_seeds,
            seed_noise_var,
            dups_per_seed,
            dup_noise_var,
            n_bad,
            bad_noise_var,
        } => {
            reject_flags(
                &[
                    ("--n-good", args.n_good.is_some()),
                    ("--good-noise-var", args.good_noise_var.is_some()),
                ],
                "two",
            )?;
            override_with(n_seeds, args.n_seeds);
            override_with(seed_noise_var, args.seed_noise_var);
            override_with(dups_per_seed, args.dups_per_seed);
            override_with(dup_noise_var, args.dup_noise_var);
            override_with(n_bad, args.n_bad);
            override_with(bad_noise_var, args.bad_noise_var);
        }
    }
    let spec = SimSpec {
        n_samples: args.n_samples.unwrap_or(200),
        case,
        rng_seed: args.seed,
    };
    let dataset = simulate::simulate(&spec)?;
    std::fs::create_dir_all(&args.out)?;
    io::write_features(&dataset, &args.out.join("features.csv"))?;
    io::write_phenotype(&dataset, &args.out.join("phenotype.csv"))?;
    io::write_labels(&dataset, &args.out.join("labels.csv"))?;
    let meta = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "tool": ToolInfo::default(),
        "spec": spec,
        "generator": simulate::GENERATOR,
        "feature_kind": FeatureKind::Continuous,
        "noise_parameters": "variance",
        "files": ["features.csv", "phenotype.csv", "labels.csv"],
    });
    report::write_json(&meta, &args.out.join("simulation.json"))?;
    info!(
        "wrote {} samples x {} features to {}",
        dataset.n_samples(),
        dataset.n_features(),
        args.out.display()
    );
    Ok(())
}

fn override_with<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn reject_flags(flags: &[(&str, bool)], case: &str) -> Result<()> {
    match flags.iter().find(|(_, set)| *set) {
        Some((name, _)) => Err(MintError::invalid(format!(
            "{name} does not apply to --case {case}"
        ))),
        None => Ok(()),
    }
}

fn run_select(args: &SelectArgs, threads: usize) -> Result<()> {
    let started = Instant::now();
    let train = args.input.load()?;
    let test = args
        .test_genotypes
        .as_deref()
        .map(|p| load_test(p, &train, args.input.load_options()))
        .transpose()?;
    if args.n == 0 || args.n > train.n_features() {
        return Err(MintError::invalid(format!(
            "--n must be between 1 and the {} available features, got {}",
            train.n_features(),
            args.n
        )));
    }
    if args.bins == Some(0) {
        return Err(MintError::invalid("--bins must be at least 1"));
    }
    let mut notes = vec![REDUNDANCY_NOTE.to_owned(), FIRST_STEP_NOTE.to_owned()];
    if args.method == Mode::Mint && test.is_none() {
        let msg = "mint without --test-genotypes has no test rows and is equivalent to mrmr";
        warn!("{msg}");
        notes.push(msg.to_owned());
    }
    let bins = args
        .bins
        .unwrap_or_else(|| default_bin_count(train.n_samples()));
    let target = train.require_target()?;
    let test_ref = test.as_ref().filter(|_| args.method == Mode::Mint);
    let view = view_from_parts(
        train.kinds(),
        |j| train.column(j).to_vec(),
        test_ref.map(|t| |j: usize| t.column(j).to_vec()),
        target,
        bins,
    )?;
    let selection = select_greedy(&view, args.n, args.method)?;
    let phi = phi_score(&selection.ranking, &view, args.method)?;
    let ranking = selection
        .ranking
        .iter()
        .enumerate()
        .map(|(rank, &index)| RankedFeature {
            rank: rank + 1,
            index,
            id: train.feature_ids()[index].clone(),
            step_score: selection.step_scores[rank],
            relevance: selection.relevance[rank],
        })
        .collect();
    let doc = SelectDocument {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::default(),
        config: SelectConfig {
            input: args.input.config(),
            test_genotypes: args.test_genotypes.clone(),
            method: args.method,
            n: args.n,
            bins,
        },
        results: vec![SelectResult {
            method: args.method,
            n: args.n,
            n_train: view.n_train(),
            n_test: view.n_test(),
            ranking,
            mi_eval_count: selection.mi_eval_count,
            phi,
        }],
        notes,
        timing: Timing {
            seconds: started.elapsed().as_secs_f64(),
            threads,
        },
    };
    report::write_json(&doc, &args.out)
}

fn load_test(path: &Path, train: &Dataset, opts: LoadOptions) -> Result<Dataset> {
    let test = io::load_genotypes(path, opts)?;
    if test.feature_ids() != train.feature_ids() {
        return Err(MintError::Input {
            path: path.to_path_buf(),
            message: "feature columns differ from the training file (same ids in the same order required)"
                .into(),
        });
    }
    Ok(test)
}

/// Parses `150,250` or `150..550:100` (inclusive) or mixtures of both.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let bad = || MintError::invalid(format!("cannot parse --n-list '{text}'"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((range, step)) = part.split_once(':') {
            let (start, end) = range.split_once("..").ok_or_else(bad)?;
            let start: usize = start.trim().parse().map_err(|_| bad())?;
            let end: usize = end.trim().parse().map_err(|_| bad())?;
            let step: usize = step.trim().parse().map_err(|_| bad())?;
            if step == 0 || end < start {
                return Err(bad());
            }
            out.extend((start..=end).step_by(step));
        } else if part.contains("..") {
            return Err(MintError::invalid(format!(
                "range '{part}' needs a step, e.g. '{part}:100'"
            )));
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_lambda(text: &str) -> Result<LambdaPolicy> {
    if text.eq_ignore_ascii_case("gcv") {
        return Ok(LambdaPolicy::Gcv {
            grid: DEFAULT_LAMBDA_GRID.to_vec(),
        });
    }
    match text.parse::<f64>() {
        Ok(lambda) if lambda.is_finite() && lambda >= 0.0 => Ok(LambdaPolicy::Fixed { lambda }),
        _ => Err(MintError::invalid(format!(
            "--lambda must be 'gcv' or a non-negative number, got '{text}'"
        ))),
    }
}

fn run_cv(args: &CvArgs, threads: usize) -> Result<()> {
    let started = Instant::now();
    let mut methods = Vec::new();
    for m in &args.methods {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    let experiment = ExperimentConfig {
        methods,
        n_features: parse_n_list(&args.n_list)?,
        folds: args.folds,
        seed: args.seed,
        lambda: parse_lambda(&args.lambda)?,
        bins: args.bins,
    };
    let dataset = args.input.load()?;
    let config = CvConfig {
        input: args.input.config(),
        experiment,
    };
    let results = run_config(&config, &dataset)?;
    let doc = CvDocument {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::default(),
        config,
        results,
        notes: vec![
            FIRST_STEP_NOTE.to_owned(),
            "feature selection is re-run inside every fold; held-out feature rows enter only mint's redundancy term".to_owned(),
            "fold_r2 is the squared Pearson correlation between held-out truth and prediction".to_owned(),
        ],
        timing: Timing {
            seconds: started.elapsed().as_secs_f64(),
            threads,
        },
    };
    report::write_json(&doc, &args.out)
}

/// Re-runs the experiment a cv report's config describes.
pub fn run_config(config: &CvConfig, dataset: &Dataset) -> Result<Vec<crate::harness::CvReport>> {
    run_experiment(dataset, &config.experiment)
}

/// Loads the inputs named in a cv report's config and re-runs it.
pub fn rerun_report(doc: &CvDocument) -> Result<Vec<crate::harness::CvReport>> {
    let input = &doc.config.input;
    let opts = LoadOptions {
        kind: input.feature_kind,
        missing: input.missing,
    };
    let features = io::load_genotypes(&input.genotypes, opts)?;
    let dataset = io::load_phenotype(&input.phenotype, features)?;
    run_config(&doc.config, &dataset)
}
