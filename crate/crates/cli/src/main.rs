//! Command-line tools for Leontief exchange economies, bimatrix games, and
//! the embedding between them.
//!
//! Conventions shared by every subcommand:
//!
//! * machine-readable results (JSON, or CSV for `experiment`) go to standard
//!   output; human-readable summaries go to standard error;
//! * exit code 0 means success (and PASS for verify commands), 1 means a
//!   verification or solve came back negative, 2 means a usage or input
//!   problem;
//! * numeric flags accept decimals (`0.01`, `1e-3`) and exact fractions
//!   (`1/100`); verify commands take `--rational` to run in exact arithmetic;
//! * seeded commands read the master seed from `--seed`, falling back to the
//!   `LEONTIEF_SEED` environment variable;
//! * input files are never modified.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::{env, fs};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use leontief_core::games::{
    check_eps_nash, check_eps_relative_nash, lemke_howson, support_enumeration_nash,
};
use leontief_core::json::{
    allocation_from_json, check_report_to_json, economy_from_json, equilibrium_from_json,
    experiment_config_from_json, game_from_json, parse, profile_from_json, profile_to_json,
    reduced_from_json, reduced_to_json, solve_result_to_json, to_pretty_string,
    trial_record_to_json,
};
use leontief_core::market::{
    check_allocation_eps_equilibrium, check_eps_equilibrium, check_strict_eps_equilibrium,
    CheckReport,
};
use leontief_core::reduction::reduce_game_to_economy;
use leontief_core::scalar::{parse_exact, BigRational, Scalar};
use leontief_core::smoothed::{
    approximate_nash_from_smoothed_leontief, perturb_economy, records_to_csv, run_experiment,
    PerturbationModel, SmoothedError, SolverSpec,
};
use leontief_core::solvers::{grid_search_equilibrium, GridSpec, SolveStatus};

type DynError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(
    name = "leontief",
    version,
    about = "Leontief economies, bimatrix games, and the embedding between them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a square [1,2]-payoff game as an exchange economy.
    Reduce(ReduceArgs),
    /// Find a Nash equilibrium of a bimatrix game.
    SolveGame(SolveGameArgs),
    /// Sweep the price simplex for an ε-approximate market equilibrium.
    SolveMarket(SolveMarketArgs),
    /// Check a market equilibrium and report per-condition slacks.
    VerifyMarket(VerifyMarketArgs),
    /// Check a Nash profile and report per-condition slacks.
    VerifyNash(VerifyNashArgs),
    /// Sample a random perturbation of an embedded economy.
    Perturb(PerturbArgs),
    /// Game → perturbed market → solver → recovered profile, end to end.
    Pipeline(PipelineArgs),
    /// Batch pipeline trials over a σ schedule; CSV on stdout.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ReduceArgs {
    /// Game document {"A": …, "B": …, "range"?: [lo, hi]} (JSON).
    #[arg(long, value_name = "FILE")]
    game: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Enumerate supports; complete for nondegenerate games.
    SupportEnumeration,
    /// Complementary pivoting from one label; one equilibrium.
    LemkeHowson,
}

#[derive(Args)]
struct SolveGameArgs {
    /// Game document (JSON).
    #[arg(long, value_name = "FILE")]
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::SupportEnumeration)]
    method: Method,
    /// Dropped label for Lemke–Howson, in 1..=m+n.
    #[arg(long, default_value_t = 1)]
    label: usize,
}

#[derive(Args)]
struct SolveMarketArgs {
    /// Economy document (JSON).
    #[arg(long, value_name = "FILE")]
    econ: PathBuf,
    /// Grid denominator k: prices are multiples of 1/k.
    #[arg(long)]
    resolution: usize,
    /// Approximation level ε to verify against.
    #[arg(long)]
    eps: String,
    /// Hard budget on grid points visited.
    #[arg(long = "max-points", default_value_t = 10_000_000)]
    max_points: usize,
}

#[derive(Args)]
struct VerifyMarketArgs {
    /// Economy document (JSON).
    #[arg(long, value_name = "FILE")]
    econ: PathBuf,
    /// Equilibrium document {"u": …, "w": …} (JSON).
    #[arg(long, value_name = "FILE")]
    eq: PathBuf,
    /// Tolerance ε.
    #[arg(long)]
    eps: String,
    /// Allocation document {"X": …}: check the allocation form against the
    /// prices from --eq instead of the utility form.
    #[arg(long, value_name = "FILE")]
    allocation: Option<PathBuf>,
    /// Strict form: exact budgets and supply, utility ≥ (1−ε)·optimum.
    #[arg(long, requires = "allocation")]
    strict: bool,
    /// Exact rational arithmetic: string literals kept exact, zero whisker.
    #[arg(long)]
    rational: bool,
}

#[derive(Args)]
struct VerifyNashArgs {
    /// Game document (JSON).
    #[arg(long, value_name = "FILE")]
    game: PathBuf,
    /// Profile document {"x": …, "y": …} (JSON).
    #[arg(long, value_name = "FILE")]
    profile: PathBuf,
    /// Tolerance ε.
    #[arg(long)]
    eps: String,
    /// Relative check: payoff ≥ (1−ε)·best response (scale-invariant,
    /// nonnegative payoffs only) instead of the additive check.
    #[arg(long)]
    relative: bool,
    /// Exact rational arithmetic: string literals kept exact, zero whisker.
    #[arg(long)]
    rational: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseModel {
    /// Uniform on [−σ, σ], clamped at zero.
    Uniform,
    /// Normal with standard deviation σ, clamped at zero.
    Gaussian,
}

#[derive(Args)]
struct PerturbArgs {
    /// Reduced-economy document (economy plus game_size/sigma; sigma must
    /// be 0).
    #[arg(long, value_name = "FILE")]
    reduced: PathBuf,
    /// Noise magnitude σ ∈ [0, 1).
    #[arg(long)]
    sigma: String,
    #[arg(long, value_enum, default_value_t = NoiseModel::Uniform)]
    model: NoiseModel,
    /// Seed (default: LEONTIEF_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Game document (JSON); payoffs must lie in [1, 2].
    #[arg(long, value_name = "FILE")]
    game: PathBuf,
    /// Relative-Nash accuracy target ε′ in (0, 1).
    #[arg(long = "eps-prime")]
    eps_prime: String,
    /// Noise magnitude override; defaults to the ε′/n³ schedule.
    #[arg(long)]
    sigma: Option<String>,
    /// Seed (default: LEONTIEF_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Solve through the exact game correspondence instead of the grid
    /// (σ = 0 runs only).
    #[arg(long, conflicts_with_all = ["resolution", "eps", "max_points"])]
    exact: bool,
    /// Grid denominator k.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Grid ε target (defaults to ε′).
    #[arg(long)]
    eps: Option<String>,
    /// Hard budget on grid points visited.
    #[arg(long = "max-points", default_value_t = 10_000_000)]
    max_points: usize,
    /// Worker threads (default: one per core). Results are identical for
    /// every worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config document (JSON): {"game", "sigmas", "trials",
    /// "eps_prime", "solver", "master_seed"?}.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Master seed override (default: LEONTIEF_SEED, then the config value).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core). Results are identical for
    /// every worker count.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, DynError> {
    match command {
        Command::Reduce(args) => cmd_reduce(&args),
        Command::SolveGame(args) => cmd_solve_game(&args),
        Command::SolveMarket(args) => cmd_solve_market(&args),
        Command::VerifyMarket(args) => {
            if args.rational {
                cmd_verify_market::<BigRational>(&args)
            } else {
                cmd_verify_market::<f64>(&args)
            }
        }
        Command::VerifyNash(args) => {
            if args.rational {
                cmd_verify_nash::<BigRational>(&args)
            } else {
                cmd_verify_nash::<f64>(&args)
            }
        }
        Command::Perturb(args) => cmd_perturb(&args),
        Command::Pipeline(args) => cmd_pipeline(&args),
        Command::Experiment(args) => cmd_experiment(&args),
    }
}

fn read_json(path: &Path) -> Result<Value, DynError> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

/// Parses a numeric flag: decimals and exact fractions, exact in rational
/// mode, rounded once to the nearest double otherwise.
fn scalar_arg<T: Scalar>(text: &str, flag: &str) -> Result<T, DynError> {
    let exact = parse_exact(text).map_err(|e| format!("--{flag}: {e}"))?;
    let v = T::from_exact(exact);
    if !v.is_valid() {
        return Err(format!("--{flag}: value out of range").into());
    }
    Ok(v)
}

/// Seed precedence: explicit flag, then LEONTIEF_SEED, then none.
fn seed_override(explicit: Option<u64>) -> Result<Option<u64>, DynError> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match env::var("LEONTIEF_SEED") {
        Ok(text) => {
            let seed = text
                .trim()
                .parse::<u64>()
                .map_err(|_| format!("LEONTIEF_SEED must be an unsigned 64-bit integer, got {text:?}"))?;
            Ok(Some(seed))
        }
        Err(env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("LEONTIEF_SEED: {e}").into()),
    }
}

fn emit(value: &Value) {
    print!("{}", to_pretty_string(value));
}

/// Prints the report JSON, a PASS/FAIL line, and maps the verdict to the
/// exit code.
fn report_verdict(report: &CheckReport) -> ExitCode {
    emit(&check_report_to_json(report));
    if report.passed {
        eprintln!("PASS");
        ExitCode::SUCCESS
    } else {
        let worst = report
            .conditions
            .iter()
            .filter(|c| !c.satisfied)
            .min_by(|a, b| a.worst_slack.total_cmp(&b.worst_slack));
        match (worst, report.witness_index) {
            (Some(c), Some(i)) => eprintln!(
                "FAIL: {} violated (worst slack {} at index {i})",
                c.name, c.worst_slack
            ),
            (Some(c), None) => eprintln!("FAIL: {} violated (worst slack {})", c.name, c.worst_slack),
            _ => eprintln!("FAIL"),
        }
        ExitCode::from(1)
    }
}

fn cmd_reduce(args: &ReduceArgs) -> Result<ExitCode, DynError> {
    let game = game_from_json::<f64>(&read_json(&args.game)?)?;
    let reduced = reduce_game_to_economy(&game)?;
    emit(&reduced_to_json(&reduced));
    eprintln!(
        "embedded a {0}×{0} game as a {1}-good, {1}-trader economy",
        game.rows(),
        2 * game.rows()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve_game(args: &SolveGameArgs) -> Result<ExitCode, DynError> {
    let game = game_from_json::<f64>(&read_json(&args.game)?)?;
    match args.method {
        Method::SupportEnumeration => {
            let found = support_enumeration_nash(&game)?;
            if found.degenerate {
                eprintln!("note: degenerate supports encountered; enumeration may be incomplete");
            }
            match found.profiles.first() {
                Some(profile) => {
                    emit(&profile_to_json(profile));
                    eprintln!(
                        "{} equilibrium profile(s) found; printed the first",
                        found.profiles.len()
                    );
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    eprintln!("no equilibrium found by support enumeration");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Method::LemkeHowson => {
            let profile = lemke_howson(&game, args.label)?;
            emit(&profile_to_json(&profile));
            eprintln!("Lemke–Howson path from dropped label {}", args.label);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_solve_market(args: &SolveMarketArgs) -> Result<ExitCode, DynError> {
    let econ = economy_from_json::<f64>(&read_json(&args.econ)?)?;
    let spec = GridSpec::new(
        args.resolution,
        scalar_arg::<f64>(&args.eps, "eps")?,
        args.max_points,
    )?;
    let result = grid_search_equilibrium(&econ, &spec)?;
    emit(&solve_result_to_json(&result));
    match result.status {
        SolveStatus::Found => {
            eprintln!(
                "found an ε-approximate equilibrium after {} grid points (measured ε = {})",
                result.points_scanned,
                result.achieved_eps.unwrap_or(f64::NAN)
            );
            Ok(ExitCode::SUCCESS)
        }
        SolveStatus::NotFound => {
            eprintln!(
                "no grid point passed at the requested ε ({} points scanned)",
                result.points_scanned
            );
            Ok(ExitCode::from(1))
        }
        SolveStatus::BudgetExhausted => {
            eprintln!(
                "point budget exhausted after {} grid points",
                result.points_scanned
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_verify_market<T: Scalar>(args: &VerifyMarketArgs) -> Result<ExitCode, DynError> {
    let econ = economy_from_json::<T>(&read_json(&args.econ)?)?;
    let eq = equilibrium_from_json::<T>(&read_json(&args.eq)?)?;
    let eps: T = scalar_arg(&args.eps, "eps")?;
    let report = match &args.allocation {
        None if args.strict => return Err("--strict requires --allocation".into()),
        None => check_eps_equilibrium(&econ, &eq.u, &eq.w, eps)?,
        Some(path) => {
            let alloc = allocation_from_json::<T>(&read_json(path)?)?;
            if args.strict {
                check_strict_eps_equilibrium(&econ, &alloc, &eq.w, eps)?
            } else {
                check_allocation_eps_equilibrium(&econ, &alloc, &eq.w, eps)?
            }
        }
    };
    Ok(report_verdict(&report))
}

fn cmd_verify_nash<T: Scalar>(args: &VerifyNashArgs) -> Result<ExitCode, DynError> {
    let game = game_from_json::<T>(&read_json(&args.game)?)?;
    let profile = profile_from_json::<T>(&read_json(&args.profile)?)?;
    let eps: T = scalar_arg(&args.eps, "eps")?;
    let report = if args.relative {
        check_eps_relative_nash(&game, &profile, eps)?
    } else {
        check_eps_nash(&game, &profile, eps)?
    };
    Ok(report_verdict(&report))
}

fn cmd_perturb(args: &PerturbArgs) -> Result<ExitCode, DynError> {
    let reduced = reduced_from_json(&read_json(&args.reduced)?)?;
    let sigma: f64 = scalar_arg(&args.sigma, "sigma")?;
    let model = match args.model {
        NoiseModel::Uniform => PerturbationModel::uniform(sigma)?,
        NoiseModel::Gaussian => PerturbationModel::gaussian(sigma)?,
    };
    let seed = seed_override(args.seed)?.unwrap_or(0);
    let perturbed = perturb_economy(&reduced, &model, seed)?;
    emit(&reduced_to_json(&perturbed));
    let name = match args.model {
        NoiseModel::Uniform => "uniform",
        NoiseModel::Gaussian => "gaussian",
    };
    eprintln!("perturbed with {name} noise, σ = {sigma}, seed = {seed}");
    Ok(ExitCode::SUCCESS)
}

fn in_pool<F, R>(workers: Option<usize>, op: F) -> Result<R, DynError>
where
    F: FnOnce() -> R + Send,
    R: Send,
{
    match workers {
        None => Ok(op()),
        Some(n) => {
            if n == 0 {
                return Err("--workers must be at least 1".into());
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| format!("worker pool: {e}"))?;
            Ok(pool.install(op))
        }
    }
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<ExitCode, DynError> {
    let game = game_from_json::<f64>(&read_json(&args.game)?)?;
    let eps_prime: f64 = scalar_arg(&args.eps_prime, "eps-prime")?;
    let sigma = args
        .sigma
        .as_deref()
        .map(|s| scalar_arg::<f64>(s, "sigma"))
        .transpose()?;
    let solver = if args.exact {
        SolverSpec::ExactReduced
    } else {
        let grid_eps = match args.eps.as_deref() {
            Some(s) => scalar_arg::<f64>(s, "eps")?,
            None => eps_prime,
        };
        SolverSpec::Grid(GridSpec::new(args.resolution, grid_eps, args.max_points)?)
    };
    let seed = seed_override(args.seed)?.unwrap_or(0);
    let outcome = in_pool(args.workers, || {
        approximate_nash_from_smoothed_leontief(&game, eps_prime, sigma, &solver, seed)
    })?;
    match outcome {
        Ok((profile, record)) => {
            emit(&json!({
                "profile": profile_to_json(&profile),
                "record": trial_record_to_json(&record),
            }));
            eprintln!(
                "recovered a profile with relative-Nash defect {} (transfer bound {}), market ε = {}, σ = {}, {} points",
                fmt_opt(record.nash_delta),
                fmt_opt(record.bound_delta),
                fmt_opt(record.market_eps),
                record.sigma,
                record.points_scanned
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(SmoothedError::SolverFailed { status, record }) => {
            emit(&json!({
                "profile": Value::Null,
                "record": trial_record_to_json(&record),
            }));
            eprintln!(
                "solver gave up ({}) after {} points",
                match status {
                    SolveStatus::Found => "found",
                    SolveStatus::NotFound => "not found",
                    SolveStatus::BudgetExhausted => "budget exhausted",
                },
                record.points_scanned
            );
            Ok(ExitCode::from(1))
        }
        Err(other) => Err(other.into()),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "—".to_owned(), |x| x.to_string())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<ExitCode, DynError> {
    let mut config = experiment_config_from_json(&read_json(&args.config)?)?;
    if let Some(seed) = seed_override(args.seed)? {
        config.master_seed = seed;
    }
    let outcome = in_pool(args.workers, || run_experiment(&config))??;
    print!("{}", records_to_csv(&outcome.records));
    eprintln!(
        "{} trials across {} σ values, master seed {}",
        outcome.records.len(),
        outcome.aggregates.len(),
        config.master_seed
    );
    for agg in &outcome.aggregates {
        eprintln!(
            "σ = {}: {} trials, {} failures, mean cost {} ms, max cost {} ms, mean δ = {}",
            agg.sigma,
            agg.trials,
            agg.failures,
            agg.mean_time_ms,
            agg.max_time_ms,
            fmt_opt(agg.mean_nash_delta)
        );
    }
    Ok(ExitCode::SUCCESS)
}
