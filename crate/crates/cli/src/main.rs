use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dprl::dataset::{self, binarize, load_csv, mine_rules, read_raw_csv, BinaryDataset, MinedRuleSet, Recipe};
use dprl::evaluation::evaluate;
use dprl::harness::{self, aggregate, write_aggregate_csv, write_noise_table_csv, write_results_csv, SweepSpec};
use dprl::learner::{audit, dp_greedy_rl, greedy_rl_with_stop, LearnerConfig, Method, TrainTrace};
use dprl::mechanisms::{MechanismKind, NoiseSource, PrivacyBudget};
use dprl::rulelist::RuleList;

/// Differentially-private greedy rule lists.
#[derive(Parser)]
#[command(name = "dprl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Binarize a raw CSV with a recipe, optionally writing a train/test split.
    Prepare(PrepareArgs),
    /// Enumerate candidate rules and write them as JSON.
    Mine(MineArgs),
    /// Fit one rule list and write it as JSON.
    Train(TrainArgs),
    /// Print accuracy and vulnerability of a model as JSON.
    Evaluate(EvaluateArgs),
    /// Run an epsilon sweep described by a config file.
    Sweep(SweepArgs),
    /// Write smooth and global noise scales for a grid of dataset sizes.
    NoiseTable(NoiseTableArgs),
    /// Check the privacy accounting of training traces.
    Audit(AuditArgs),
}

#[derive(Args)]
struct PrepareArgs {
    /// Raw CSV with a header row.
    #[arg(long)]
    raw: PathBuf,
    /// Recipe file (label, drop list, bin counts).
    #[arg(long)]
    recipe: PathBuf,
    /// Binary CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Name of the label column in the written files.
    #[arg(long, default_value = "label")]
    label: String,
    /// Also write the training part of a random split here.
    #[arg(long, requires = "test_out")]
    train_out: Option<PathBuf>,
    /// Also write the test part of a random split here.
    #[arg(long, requires = "train_out")]
    test_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Split seed; drawn from system entropy and printed when absent.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DataArgs {
    /// Binary CSV (all cells 0 or 1).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label: String,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 2)]
    max_arity: usize,
    /// Minimum fraction of rows an antecedent must capture.
    #[arg(long, default_value_t = 0.0)]
    min_support: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Rule set from `mine`; mined on the fly when absent.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    max_arity: usize,
    /// sm-laplace, sm-cauchy, gl-laplace, gl-gaussian, exponential, noisy-counts or none.
    #[arg(long, default_value = "sm-laplace")]
    mechanism: String,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Defaults to 1/n² for n training rows.
    #[arg(long)]
    delta: Option<f64>,
    /// Rule-list length including the default rule.
    #[arg(long, default_value_t = 5)]
    max_length: usize,
    /// Minimum support as a fraction of the training rows.
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Tail exponent of the smooth Cauchy noise.
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    /// Noise seed; drawn from system entropy and printed when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Publish the noisy label counts with the model.
    #[arg(long)]
    release_counts: bool,
    /// Model JSON to write.
    #[arg(long)]
    out: PathBuf,
    /// Training trace JSON to write, for `audit`.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training CSV the model was fit on.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value = "label")]
    label: String,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Per-record results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-(mechanism, epsilon) aggregate CSV.
    #[arg(long)]
    aggregate: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct NoiseTableArgs {
    /// Absolute minimum support.
    #[arg(long, default_value_t = 10)]
    lambda_abs: usize,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 5)]
    max_length: usize,
    /// Comma-separated dataset sizes; a log grid from lambda-abs to 10⁶ when absent.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    /// Trace files written by `train --trace-out`.
    #[arg(long, num_args = 1..)]
    trace: Vec<PathBuf>,
    /// Train every mechanism on this binary CSV and audit the traces.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label: String,
    #[arg(long, default_value_t = 1)]
    max_arity: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,1,10,100")]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
}

/// Bad flags or flag combinations.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// A trace failed its privacy accounting.
#[derive(Debug)]
struct AuditFailure(usize);

impl fmt::Display for AuditFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} trace(s) failed the budget audit", self.0)
    }
}

impl std::error::Error for AuditFailure {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn prepare(args: PrepareArgs) -> Result<()> {
    if !(args.train_fraction > 0.0 && args.train_fraction < 1.0) {
        return Err(usage("--train-fraction must lie in (0, 1)"));
    }
    let recipe = Recipe::load(&args.recipe)?;
    let out = binarize(&read_raw_csv(&args.raw)?, &recipe)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let data = out.dataset;
    data.write_csv(&args.out, &args.label)?;
    eprintln!(
        "{}: {} rows, {} features, {} positive",
        args.out.display(),
        data.n_samples(),
        data.n_features(),
        data.positive_count()
    );
    if let (Some(train_out), Some(test_out)) = (args.train_out, args.test_out) {
        let seed = seed_or_entropy(args.seed);
        let (train, test) = dataset::split(&data, args.train_fraction, seed)?;
        train.write_csv(&train_out, &args.label)?;
        test.write_csv(&test_out, &args.label)?;
    }
    Ok(())
}

fn mine(args: MineArgs) -> Result<()> {
    if !(1..=2).contains(&args.max_arity) {
        return Err(usage("--max-arity must be 1 or 2"));
    }
    let data = load_csv(&args.data.data, &args.data.label)?;
    let rules = mine_rules(&data, args.max_arity, args.min_support)?;
    write_file(&args.out, &rules.to_json(data.feature_names())?)?;
    eprintln!("{} antecedents", rules.len());
    Ok(())
}

fn load_or_mine(rules: Option<&Path>, data: &BinaryDataset, max_arity: usize) -> Result<MinedRuleSet> {
    Ok(match rules {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            MinedRuleSet::from_json(&text, data.feature_names())?
        }
        None => mine_rules(data, max_arity, 0.0)?,
    })
}

fn train(args: TrainArgs) -> Result<()> {
    let method: Method = args.mechanism.parse().map_err(|e: dprl::Error| usage(e.to_string()))?;
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(usage("--epsilon must be positive"));
    }
    if let Some(d) = args.delta {
        if !(d > 0.0 && d < 1.0) {
            return Err(usage("--delta must lie in (0, 1)"));
        }
    }
    let config = LearnerConfig {
        max_length: args.max_length,
        min_support: args.lambda,
        confidence: args.confidence,
        gamma: args.gamma,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    if !matches!(method, Method::NonPrivate) && args.max_length < 2 {
        return Err(usage("--max-length must be at least 2 for private training"));
    }

    let data = load_csv(&args.data.data, &args.data.label)?;
    let rules = load_or_mine(args.rules.as_deref(), &data, args.max_arity)?;
    let (model, stop) = match method {
        Method::NonPrivate => greedy_rl_with_stop(&data, &rules, &config)?,
        Method::Private(kind) => {
            let n = data.n_samples() as f64;
            let delta = args.delta.unwrap_or(1.0 / (n * n));
            let budget = PrivacyBudget::new(args.epsilon, delta, args.max_length, args.release_counts)?;
            let mut source = NoiseSource::new(seed_or_entropy(args.seed));
            let (model, trace) = dp_greedy_rl(&data, &rules, &config, kind, &budget, &mut source)?;
            if let Some(path) = &args.trace_out {
                write_file(path, &trace.to_json()?)?;
            }
            (model, trace.stop_reason)
        }
    };
    write_file(&args.out, &model.to_json(data.feature_names())?)?;
    eprint!("{}", model.pretty(data.feature_names()));
    eprintln!("stop: {stop}");
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let train = load_csv(&args.train, &args.label)?;
    let test = load_csv(&args.test, &args.label)?;
    if train.feature_names() != test.feature_names() {
        bail!(dprl::Error::InvalidRuleList(
            "train and test files have different features".into()
        ));
    }
    let text = fs::read_to_string(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let model = RuleList::from_json(&text, train.feature_names())?;
    let report = evaluate(&model, &train, &test)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = SweepSpec::load(&args.config).map_err(|e| match e {
        dprl::Error::Io { .. } => anyhow::Error::from(e),
        other => usage(other.to_string()),
    })?;
    let source = spec
        .dataset
        .as_ref()
        .ok_or_else(|| usage("the sweep config names no dataset"))?;
    let data = source.load()?;
    let fixed = match &spec.rules {
        Some(path) => Some(load_or_mine(Some(path), &data, spec.max_arity)?),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let result = pool.install(|| harness::run_sweep(&spec, &data, fixed.as_ref()))?;
    write_results_csv(&result, &args.out)?;
    let rows = aggregate(&result);
    if let Some(path) = &args.aggregate {
        write_aggregate_csv(&rows, path)?;
    }
    for r in &rows {
        eprintln!(
            "{:>13} eps={:<10} acc={:.4}±{:.4} vuln={:.4}",
            r.method.name(),
            r.epsilon,
            r.mean_acc,
            r.std_acc,
            r.mean_vuln
        );
    }
    let failed = result.records.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        eprintln!("{failed} record(s) failed");
    }
    Ok(())
}

fn noise_table(args: NoiseTableArgs) -> Result<()> {
    let grid = if args.n.is_empty() {
        let lo = (args.lambda_abs.max(1) as f64).log10();
        let mut g: Vec<usize> = (0..=40)
            .map(|i| 10f64.powf(lo + (6.0 - lo) * i as f64 / 40.0).round() as usize)
            .collect();
        g.dedup();
        g
    } else {
        args.n
    };
    let rows = harness::noise_scale_table(&grid, args.lambda_abs, args.epsilon, args.delta, args.max_length)
        .map_err(|e| usage(e.to_string()))?;
    write_noise_table_csv(&rows, &args.out)?;
    Ok(())
}

fn audit_cmd(args: AuditArgs) -> Result<()> {
    if args.trace.is_empty() && args.data.is_none() {
        return Err(usage("give --trace files or --data to audit"));
    }
    let mut traces = Vec::new();
    for path in &args.trace {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        traces.push((path.display().to_string(), TrainTrace::from_json(&text)?));
    }
    if let Some(path) = &args.data {
        let data = load_csv(path, &args.label)?;
        let rules = mine_rules(&data, args.max_arity, 0.0)?;
        let n = data.n_samples() as f64;
        for release in [false, true] {
            for &eps in &args.epsilons {
                let budget = PrivacyBudget::new(eps, 1.0 / (n * n), 5, release)?;
                let config = LearnerConfig {
                    min_support: args.lambda,
                    ..LearnerConfig::default()
                };
                for kind in MechanismKind::ALL {
                    for seed in 0..args.seeds {
                        let mut source = NoiseSource::new(seed);
                        let (_, trace) = dp_greedy_rl(&data, &rules, &config, kind, &budget, &mut source)?;
                        traces.push((format!("{kind} eps={eps} release={release} seed={seed}"), trace));
                    }
                }
            }
        }
    }
    let mut failures = 0;
    for (name, trace) in &traces {
        let report = audit(trace);
        if !report.passed() {
            failures += 1;
            println!("FAIL {name}: {}", report.violations.join("; "));
        }
    }
    println!("{} trace(s) audited, {failures} failure(s)", traces.len());
    if failures > 0 {
        return Err(AuditFailure(failures).into());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    if err.downcast_ref::<AuditFailure>().is_some() {
        return 3;
    }
    match err.downcast_ref::<dprl::Error>() {
        Some(dprl::Error::InvalidParameter(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Prepare(a) => prepare(a),
        Command::Mine(a) => mine(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::NoiseTable(a) => noise_table(a),
        Command::Audit(a) => audit_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
