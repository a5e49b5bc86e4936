use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ihw::engine::{
    apply_procedure, bin_table, run_ihw, FoldSource, IhwConfig, LearnedSplit, Procedure,
    DEFAULT_FOLDS, DEFAULT_TAU, DEFAULT_TAU_PRIME,
};
use ihw::hypothesis::{normalize_weights, split_folds, FoldStrategy};
use ihw::learner::{default_lambda_grid, Regularization};
use ihw::rng::derive_seed;
use ihw::simulation::{
    counterexample, counterexample_fwer, estimate_error_rates_batch, parse_scenarios,
    write_report_csv, CounterexampleWeights, Replicate, ReportRow,
};
use ihw::IhwError;

mod table_io;

/// Covariate-weighted multiple testing (independent hypothesis weighting).
#[derive(Debug, Parser)]
#[command(name = "ihw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn weights from a CSV of p-values and covariates and test them.
    Test(TestArgs),
    /// Estimate FDR, FWER and power of procedures on simulated scenarios.
    Simulate(SimulateArgs),
    /// Monte Carlo check of the naive-weighting counterexample.
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProcedureName {
    Bonferroni,
    KBonferroni,
    Holm,
    Sidak,
    Bh,
    By,
    Ihwc,
    IhwcStorey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FoldStrategyArg {
    /// Use the input's fold column.
    Column,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Adversarial,
    Uniform,
}

/// Options shared by `test` and `simulate`.
#[derive(Debug, Args)]
struct IhwArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = ProcedureName::Bh)]
    procedure: ProcedureName,
    /// k for k-bonferroni.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Number of folds K; with the column strategy it defaults to the largest label.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, value_enum)]
    fold_strategy: Option<FoldStrategyArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random splits whose weights are averaged.
    #[arg(long, default_value_t = 1)]
    splits: usize,
    /// Covariate bins J (default depends on m).
    #[arg(long)]
    bins: Option<usize>,
    /// `auto` (cross-validated), `none` (unregularized) or a value >= 0.
    #[arg(long, default_value = "auto")]
    lambda: String,
    /// Censoring level for ihwc and ihwc-storey.
    #[arg(long)]
    tau: Option<f64>,
    /// Storey level for ihwc-storey.
    #[arg(long)]
    tau_prime: Option<f64>,
}

#[derive(Debug, Args)]
struct TestArgs {
    /// CSV with columns pvalue, covariate and optionally fold.
    input: PathBuf,
    #[command(flatten)]
    ihw: IhwArgs,
    /// Output CSV; standard output if omitted (the summary then goes to
    /// standard error).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file with one `[name]` section per scenario.
    scenarios: PathBuf,
    #[command(flatten)]
    ihw: IhwArgs,
    /// Comma-separated methods: a procedure name for uniform weights or
    /// `ihw-<procedure>` for learned weights.
    #[arg(long, default_value = "bh,ihw-bh")]
    methods: String,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CounterexampleArgs {
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 1_000_000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Scheme::Adversarial)]
    scheme: Scheme,
}

/// An error with its exit code: 1 for usage, 2 for data.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn from_data(e: IhwError) -> Self {
        Failure::data(e.to_string())
    }

    fn from_config(e: IhwError) -> Self {
        Failure::usage(e.to_string())
    }
}

fn procedure(args: &IhwArgs, name: ProcedureName) -> Result<Procedure, Failure> {
    let censored = matches!(name, ProcedureName::Ihwc | ProcedureName::IhwcStorey);
    if args.tau.is_some() && !censored {
        return Err(Failure::from_config(IhwError::ConfigMismatch(
            "--tau needs --procedure ihwc or ihwc-storey".into(),
        )));
    }
    if args.tau_prime.is_some() && name != ProcedureName::IhwcStorey {
        return Err(Failure::from_config(IhwError::ConfigMismatch(
            "--tau-prime needs --procedure ihwc-storey".into(),
        )));
    }
    let tau = args.tau.unwrap_or(DEFAULT_TAU);
    Ok(match name {
        ProcedureName::Bonferroni => Procedure::Bonferroni,
        ProcedureName::KBonferroni => Procedure::KBonferroni { k: args.k },
        ProcedureName::Holm => Procedure::Holm,
        ProcedureName::Sidak => Procedure::Sidak,
        ProcedureName::Bh => Procedure::Bh,
        ProcedureName::By => Procedure::By,
        ProcedureName::Ihwc => Procedure::Ihwc { tau },
        ProcedureName::IhwcStorey => Procedure::IhwcStorey {
            tau,
            tau_prime: args.tau_prime.unwrap_or(DEFAULT_TAU_PRIME),
        },
    })
}

fn lambda_grid(text: &str) -> Result<Vec<Regularization>, Failure> {
    match text {
        "auto" => Ok(default_lambda_grid()),
        "none" => Ok(vec![Regularization::Unregularized]),
        v => match v.parse::<f64>() {
            Ok(l) if l >= 0.0 && l.is_finite() => Ok(vec![Regularization::Lambda(l)]),
            _ => Err(Failure::usage(format!(
                "--lambda must be auto, none or a number >= 0, got {v:?}"
            ))),
        },
    }
}

/// Builds and validates the engine configuration. `fold_column` tells
/// whether the data carry fold labels and, if so, the largest one.
fn ihw_config(
    args: &IhwArgs,
    procedure: Procedure,
    fold_column: Option<usize>,
) -> Result<IhwConfig, Failure> {
    let mut config = IhwConfig::new(args.alpha, procedure);
    let strategy = args.fold_strategy.unwrap_or(FoldStrategyArg::Random);
    config.fold_source = match strategy {
        FoldStrategyArg::Column => FoldSource::Labels,
        FoldStrategyArg::Random => FoldSource::Random,
    };
    config.n_folds = match (args.folds, strategy, fold_column) {
        (Some(k), _, _) => k,
        (None, FoldStrategyArg::Column, Some(max)) => max,
        (None, FoldStrategyArg::Column, None) => {
            return Err(Failure::usage(
                "--fold-strategy column needs a fold column in the input",
            ))
        }
        (None, FoldStrategyArg::Random, _) => DEFAULT_FOLDS,
    };
    config.seed = args.seed;
    config.splits = args.splits;
    config.learner.n_bins = args.bins;
    config.learner.lambda_grid = lambda_grid(&args.lambda)?;
    config.learner.censor_tau = procedure.censor_tau();
    if args.splits == 0 {
        return Err(Failure::usage("--splits must be at least 1"));
    }
    config.validate().map_err(Failure::from_config)?;
    Ok(config)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::data(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn open_input(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::data(format!("cannot open {}: {e}", path.display())))
}

fn format_lambda(l: Option<Regularization>) -> String {
    match l {
        None => "-".into(),
        Some(Regularization::Unregularized) => "none".into(),
        Some(Regularization::Lambda(v)) => v.to_string(),
    }
}

fn cmd_test(args: &TestArgs) -> Result<(), Failure> {
    let proc = procedure(&args.ihw, args.ihw.procedure)?;
    let input = table_io::read_table(open_input(&args.input)?)?;
    let max_label = input
        .table
        .fold_labels()
        .map(|l| l.iter().copied().max().unwrap_or(0));
    let config = ihw_config(&args.ihw, proc, max_label)?;
    let result = run_ihw(&input.table, &config).map_err(Failure::from_data)?;
    let folds: Vec<usize> = match result.weights.partition() {
        Some(p) => (0..p.m()).map(|i| p.fold_of(i) + 1).collect(),
        // averaged over splits: report the first split's folds
        None => {
            let strategy = FoldStrategy::Random { seed: config.seed };
            let p = split_folds(&input.table, config.n_folds, strategy).map_err(Failure::from_data)?;
            (0..p.m()).map(|i| p.fold_of(i) + 1).collect()
        }
    };

    table_io::write_results(&input, &result, &folds, open_output(args.output.as_deref())?)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "m: {}", input.table.m());
    let _ = writeln!(summary, "K: {}", config.n_folds);
    let _ = writeln!(summary, "procedure: {}", proc.name());
    let _ = writeln!(summary, "alpha: {}", config.alpha);
    if let Some(tau) = proc.censor_tau() {
        let _ = writeln!(summary, "tau: {tau}");
    }
    if let Procedure::IhwcStorey { tau_prime, .. } = proc {
        let _ = writeln!(summary, "tau_prime: {tau_prime}");
    }
    let _ = writeln!(summary, "bins: {}", result.bins.n_bins());
    let _ = writeln!(summary, "splits: {}", config.splits);
    let _ = writeln!(summary, "discoveries: {}", result.outcome.discoveries());
    for (b, split) in result.splits.iter().enumerate() {
        let lambdas: Vec<String> = split.iter().map(|f| format_lambda(f.lambda)).collect();
        let _ = writeln!(summary, "lambda (split {}): {}", b + 1, lambdas.join(","));
    }
    if args.output.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

/// A simulate method: a procedure with learned or uniform weights.
#[derive(Debug, Clone)]
struct Method {
    name: String,
    procedure: Procedure,
    learned: bool,
}

fn parse_methods(args: &SimulateArgs) -> Result<Vec<Method>, Failure> {
    let mut methods = Vec::new();
    for token in args.methods.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (learned, base) = match token.strip_prefix("ihw-") {
            Some(rest) => (true, rest),
            None => (false, token),
        };
        let name = ProcedureName::from_str(base, true)
            .map_err(|_| Failure::usage(format!("unknown method {token:?}")))?;
        methods.push(Method {
            name: token.to_string(),
            procedure: procedure(&args.ihw, name)?,
            learned,
        });
    }
    if methods.is_empty() {
        return Err(Failure::usage("--methods is empty"));
    }
    Ok(methods)
}

/// Runs `method` on one replicate.
fn run_method(rep: &Replicate, method: &Method, config: &IhwConfig, seed: u64) -> ihw::Result<Vec<bool>> {
    let mut config = config.clone();
    config.procedure = method.procedure;
    config.learner.censor_tau = method.procedure.censor_tau();
    config.seed = seed;
    if method.learned {
        return Ok(run_ihw(&rep.table, &config)?.outcome.rejected);
    }
    let partition = split_folds(&rep.table, config.n_folds, FoldStrategy::Random { seed })?;
    let m = rep.table.m();
    let uniform = LearnedSplit {
        weights: normalize_weights(&vec![1.0; m], &partition)?,
        partition,
        bins: bin_table(&rep.table, Some(1))?,
        folds: Vec::new(),
        censor_tau: method.procedure.censor_tau(),
    };
    let (_, outcome, _) = apply_procedure(rep.table.pvalues(), &uniform, method.procedure, config.alpha)?;
    Ok(outcome.rejected)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    if args.ihw.fold_strategy == Some(FoldStrategyArg::Column) {
        return Err(Failure::usage(
            "simulated data carry no fold column; use --fold-strategy random",
        ));
    }
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let methods = parse_methods(args)?;
    let base = ihw_config(&args.ihw, methods[0].procedure, None)?;
    for m in &methods {
        let mut c = base.clone();
        c.procedure = m.procedure;
        c.learner.censor_tau = m.procedure.censor_tau();
        c.validate().map_err(Failure::from_config)?;
    }
    let text = std::fs::read_to_string(&args.scenarios).map_err(|e| {
        Failure::data(format!("cannot read {}: {e}", args.scenarios.display()))
    })?;
    let scenarios = parse_scenarios(&text).map_err(Failure::from_data)?;

    let mut rows = Vec::new();
    for (s, scenario) in scenarios.iter().enumerate() {
        let seed = derive_seed(&[args.ihw.seed, s as u64]);
        let reports = estimate_error_rates_batch(scenario, args.reps, seed, methods.len(), |rep| {
            methods
                .iter()
                .map(|m| run_method(rep, m, &base, seed))
                .collect()
        })
        .map_err(Failure::from_data)?;
        for (method, report) in methods.iter().zip(reports) {
            rows.push(ReportRow {
                scenario: scenario.name.clone(),
                procedure: method.name.clone(),
                alpha: base.alpha,
                report,
            });
        }
    }
    let mut out = open_output(args.output.as_deref())?;
    write_report_csv(&rows, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::data(format!("cannot write report: {e}")))
}

fn cmd_counterexample(args: &CounterexampleArgs) -> Result<(), Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::from_config(IhwError::InvalidLevel(args.alpha)));
    }
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let scheme = match args.scheme {
        Scheme::Adversarial => CounterexampleWeights::Adversarial,
        Scheme::Uniform => CounterexampleWeights::Uniform,
    };
    let report = counterexample(args.alpha, args.reps, args.seed, scheme).map_err(Failure::from_config)?;
    println!("alpha: {}", args.alpha);
    println!("analytic FWER: {}", counterexample_fwer(args.alpha));
    println!("MC FWER: {} (se {}, {} reps)", report.fwer, report.fwer_se, report.reps);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Counterexample(args) => cmd_counterexample(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
