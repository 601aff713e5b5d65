//! Command-line front end: load states, run partition queries, emit verdict
//! reports, and reproduce the built-in example states.
//!
//! Exit codes are scriptable: 0 = INCONCLUSIVE (or plain success), 1 = usage
//! error, 2 = input error, 3 = ENTANGLED. Machine-readable JSON goes to
//! stdout (or `--out`), human summaries go to stderr.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gausswit_core::{
    build_gamma, check_partition_grouping, evaluate_lambda, sample_oracle, states, CovarianceMatrix,
    Error as CoreError, OptimizerConfig, ParamVector, PartitionQuery, PartyStructure, Status,
    WitnessParams,
};

const EXIT_INCONCLUSIVE: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_ENTANGLED: u8 = 3;

#[derive(Parser)]
#[command(name = "gausswit", version, about = "Entanglement criterion for multipartite Gaussian states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a partition query against a state and emit a verdict report
    Check(CheckArgs),
    /// Write one of the built-in example states in the state-file format
    Demo(DemoArgs),
    /// Evaluate the Γ matrix at explicit parameters and print it
    #[command(name = "gamma-eval")]
    GammaEval(GammaEvalArgs),
    /// Random-sampling minimum of one minor, as an optimizer cross-check
    Oracle(OracleArgs),
}

#[derive(Args)]
struct StateSource {
    /// Load the state from a JSON file
    #[arg(long, value_name = "PATH", conflicts_with = "demo")]
    state: Option<PathBuf>,
    /// Use a built-in state: symmetric | mixed | vacuum
    #[arg(long, value_name = "NAME")]
    demo: Option<String>,
    /// Diagonal parameter of the symmetric demo state (a ≥ 1)
    #[arg(long, default_value_t = 10.0)]
    a: f64,
    /// Mixing parameter of the mixed demo state
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
}

#[derive(Args)]
struct QueryArgs {
    /// Regroup modes into coarser parties, e.g. "12|3|45" or "1,2|3|4,5"
    #[arg(long, value_name = "SPEC")]
    partition: Option<String>,
    /// Query a subset of parties (1-based, comma separated), e.g. 2,4,5
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    parties: Option<Vec<usize>>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: StateSource,
    #[command(flatten)]
    query: QueryArgs,
    /// Random restarts per minor
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Master seed (falls back to GAUSSWIT_SEED)
    #[arg(long, env = "GAUSSWIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Verdict threshold: λ < −tolerance reads ENTANGLED
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    /// Worker threads (0 = default pool)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Local-search kernel: gradient | nelder-mead (alias derivative-free)
    #[arg(long, default_value = "gradient")]
    mode: String,
    /// Scan all principal minors instead of the leading ones only
    #[arg(long)]
    exhaustive: bool,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Omit the timestamp field from the report
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct DemoArgs {
    /// symmetric | mixed | vacuum
    name: String,
    /// Diagonal parameter of the symmetric state (a ≥ 1)
    #[arg(long, default_value_t = 10.0)]
    a: f64,
    /// Mixing parameter of the mixed state
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Number of single-mode parties of the vacuum state
    #[arg(long, default_value_t = 2)]
    parties: usize,
    /// Write the state here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GammaEvalArgs {
    /// State file to evaluate against
    #[arg(long, value_name = "PATH")]
    state: PathBuf,
    /// JSON file with {"alpha": [[...]], "beta": [[...]]} blocks per party
    #[arg(long, value_name = "PATH")]
    params: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: StateSource,
    #[command(flatten)]
    query: QueryArgs,
    /// Minor order to sample; defaults to the full subset determinant
    #[arg(long, value_name = "K")]
    minor: Option<usize>,
    /// Number of random parameter points
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Master seed (falls back to GAUSSWIT_SEED)
    #[arg(long, env = "GAUSSWIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Negativity threshold for the exit code
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    /// Worker threads (0 = default pool)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write the result here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Input(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::UnknownStrategy(..) => CliError::Usage(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Check(args) => run_check(args),
        Command::Demo(args) => run_demo(args),
        Command::GammaEval(args) => run_gamma_eval(args),
        Command::Oracle(args) => run_oracle(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn load_source(source: &StateSource) -> Result<(PartyStructure, CovarianceMatrix), CliError> {
    match (&source.state, &source.demo) {
        (Some(path), None) => Ok(gausswit_core::load_state(path)?),
        (None, Some(name)) => match name.as_str() {
            "symmetric" => Ok(states::symmetric_pure_cm(source.a)?),
            "mixed" => Ok(states::mixed_bipartite_cm(source.lambda)),
            "vacuum" => Ok(states::vacuum_cm(2)?),
            other => Err(CliError::Usage(format!(
                "unknown demo state `{other}` (expected symmetric, mixed, or vacuum)"
            ))),
        },
        (None, None) => Err(CliError::Usage("need either --state or --demo".into())),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with prevents this"),
    }
}

/// Parse a mode-grouping spec like "12|3|45" (digit per mode) or
/// "1,2|3|4,5" (comma-separated, for states with ten or more modes).
/// Mode indices are 1-based in the spec and 0-based in the result.
fn parse_partition_spec(spec: &str) -> Result<Vec<Vec<usize>>, CliError> {
    let mut groups = Vec::new();
    for chunk in spec.split('|') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            return Err(CliError::Usage(format!("empty mode group in partition spec `{spec}`")));
        }
        let mut group = Vec::new();
        if chunk.contains(',') {
            for item in chunk.split(',') {
                let mode: usize = item.trim().parse().map_err(|_| {
                    CliError::Usage(format!("bad mode index `{item}` in partition spec"))
                })?;
                if mode == 0 {
                    return Err(CliError::Usage("mode indices are 1-based".into()));
                }
                group.push(mode - 1);
            }
        } else {
            for ch in chunk.chars() {
                let mode = ch.to_digit(10).ok_or_else(|| {
                    CliError::Usage(format!("bad character `{ch}` in partition spec `{spec}`"))
                })? as usize;
                if mode == 0 {
                    return Err(CliError::Usage("mode indices are 1-based".into()));
                }
                group.push(mode - 1);
            }
        }
        groups.push(group);
    }
    Ok(groups)
}

fn resolve_query(
    ps: PartyStructure,
    query: &QueryArgs,
) -> Result<(PartyStructure, PartitionQuery), CliError> {
    let effective = match &query.partition {
        Some(spec) => {
            let groups = parse_partition_spec(spec)?;
            check_partition_grouping(&ps, &groups)?
        }
        None => ps,
    };
    let subset = match &query.parties {
        Some(list) => PartitionQuery::from_one_based(list, effective.party_count())?,
        None => PartitionQuery::all(effective.party_count())?,
    };
    Ok((effective, subset))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(e.to_string())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run_check(args: CheckArgs) -> Result<u8, CliError> {
    let (ps, cm) = load_source(&args.source)?;
    let (effective, subset) = resolve_query(ps, &args.query)?;
    let cfg = OptimizerConfig {
        restarts: args.restarts,
        seed: args.seed,
        decision_tolerance: args.tolerance,
        threads: args.threads,
        mode: args.mode.clone(),
        exhaustive: args.exhaustive,
        ..OptimizerConfig::default()
    };
    let mut report = evaluate_lambda(&cm, &effective, &subset, &cfg)?;
    if !args.no_timestamp {
        report.timestamp = Some(chrono::Utc::now().to_rfc3339());
    }
    emit(&args.out, &(gausswit_core::report_to_json(&report) + "\n"))?;

    eprintln!(
        "state: {} modes as parties {:?}; query {:?} ({} minors)",
        effective.total_modes(),
        effective.sizes(),
        report.partition,
        report.minors.len()
    );
    for minor in &report.minors {
        eprintln!("  minor k={} parties {:?}: min {:.6e}", minor.k, minor.parties, minor.min_value);
    }
    match report.status {
        Status::Entangled => {
            eprintln!("lambda = {:.6e} < -{:.1e}: ENTANGLED", report.lambda, args.tolerance);
            Ok(EXIT_ENTANGLED)
        }
        Status::Inconclusive => {
            eprintln!("lambda = {:.6e}: INCONCLUSIVE (no violation found)", report.lambda);
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn run_demo(args: DemoArgs) -> Result<u8, CliError> {
    let (ps, cm) = match args.name.as_str() {
        "symmetric" => states::symmetric_pure_cm(args.a)?,
        "mixed" => states::mixed_bipartite_cm(args.lambda),
        "vacuum" => states::vacuum_cm(args.parties)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown demo state `{other}` (expected symmetric, mixed, or vacuum)"
            )))
        }
    };
    emit(&args.out, &(gausswit_core::state_to_json(&ps, &cm) + "\n"))?;
    eprintln!("wrote {} state: {} modes, parties {:?}", args.name, ps.total_modes(), ps.sizes());
    Ok(EXIT_INCONCLUSIVE)
}

fn run_gamma_eval(args: GammaEvalArgs) -> Result<u8, CliError> {
    let (ps, cm) = gausswit_core::load_state(&args.state)?;
    let text = fs::read_to_string(&args.params).map_err(|e| CliError::Input(e.to_string()))?;
    let witness: WitnessParams =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("params file: {e}")))?;
    let v: ParamVector = witness.to_param_vector()?;
    let gamma = build_gamma(&cm, &ps, &v)?;
    let rows: Vec<Vec<f64>> = (0..gamma.order())
        .map(|i| (0..gamma.order()).map(|j| gamma.entry(i, j)).collect())
        .collect();
    println!("{}", serde_json::to_string_pretty(&rows).expect("matrix serialization cannot fail"));
    Ok(EXIT_INCONCLUSIVE)
}

fn run_oracle(args: OracleArgs) -> Result<u8, CliError> {
    let (ps, cm) = load_source(&args.source)?;
    let (effective, subset) = resolve_query(ps, &args.query)?;
    let k = args.minor.unwrap_or(subset.len());
    let run = || sample_oracle(&cm, &effective, subset.parties(), k, args.samples, args.seed);
    let min_value = if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(run)?
    } else {
        run()?
    };
    let payload = serde_json::json!({
        "min_value": min_value,
        "k": k,
        "samples": args.samples,
        "seed": args.seed,
    });
    emit(&args.out, &(serde_json::to_string_pretty(&payload).expect("serialization cannot fail") + "\n"))?;
    eprintln!(
        "sampled {} points of minor k={} on parties {:?}: min {min_value:.6e}",
        args.samples,
        k,
        subset.to_one_based()
    );
    if min_value < -args.tolerance {
        Ok(EXIT_ENTANGLED)
    } else {
        Ok(EXIT_INCONCLUSIVE)
    }
}
