//! `metra`: run, encode, and analyze measurement-procedure machines from the
//! command line. Every JSON report embeds the tool version, the effective
//! seed and budget, and digests of the inputs, so identical invocations
//! produce byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use metra_core::{
    build_provider_set, builtin_decider, builtin_verifier, parse_dsl, quote, refute_halting_decider,
    refute_verifier, render_dsl, run, run_trials, truncate_significant, unquote, DslError, Machine,
    OracleSet, RunStatus, ThermometerParams, TraceLevel, Trial, WorldConfig,
};

/// Print a line to stdout, exiting quietly if the reader closed the pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let mut stdout = std::io::stdout().lock();
        if writeln!(stdout, $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "metra", version, about = "Measurement procedures as machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a machine file for well-formedness violations.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Run a machine and report status, result, and steps.
    Run {
        file: PathBuf,
        /// Initial tape content.
        #[arg(long, default_value = "")]
        input: String,
        /// World configuration file (JSON).
        #[arg(long)]
        world: Option<PathBuf>,
        /// World seed; overrides the seed in the world configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Record every step in the report.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Print a machine's canonical single-string encoding.
    Quote {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Decode a quoted machine back to canonical machine text.
    Unquote {
        quote: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Run a machine once per seed and report repeatability.
    Trials {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        world: Option<PathBuf>,
        /// Seed list: a range "0..100", a comma list "1,2,3", or one seed.
        #[arg(long, default_value = "0..10")]
        seeds: String,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Also report repeatability after truncating results to this many
        /// significant figures.
        #[arg(long)]
        sigfigs: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Refute a candidate measurement verifier by self-application.
    Refute {
        /// const-yes, const-no, or sim:<budget>.
        #[arg(long)]
        candidate: String,
        /// World configuration file; its first thermometer entry supplies
        /// defaults for --true-temp and --noise-sigma.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long)]
        true_temp: Option<f64>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Refute a candidate halting decider by self-application.
    DemoHalting {
        /// const-H, const-N, or bounded-sim:<budget>.
        #[arg(long)]
        candidate: String,
        /// Run budget; defaults to 10x the candidate's own budget.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

/// Errors that mean the invocation itself was unusable: missing files, bad
/// syntax, bad configuration. These exit 2; domain negatives exit 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn usage(message: impl Into<String>) -> UsageError {
    UsageError(message.into())
}

#[derive(Serialize)]
struct Envelope<R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    budget: u64,
    inputs: BTreeMap<String, String>,
    report: R,
}

fn digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

fn emit<R: Serialize>(envelope: &Envelope<R>) {
    say!(
        "{}",
        serde_json::to_string_pretty(envelope).expect("reports serialize")
    );
}

fn read_file(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path) -> Result<(Machine, String), UsageError> {
    let text = read_file(path)?;
    match parse_dsl(&text) {
        Ok(m) => Ok((m, text)),
        Err(e) => Err(usage(format!("{}: {e}", path.display()))),
    }
}

fn load_world(path: Option<&Path>) -> Result<(WorldConfig, BTreeMap<String, String>), UsageError> {
    let mut inputs = BTreeMap::new();
    let config = match path {
        None => WorldConfig::default(),
        Some(p) => {
            let text = read_file(p)?;
            inputs.insert("world".into(), digest(text.as_bytes()));
            metra_core::parse_world_config(&text)
                .map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
    };
    Ok((config, inputs))
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, UsageError> {
    let bad = || usage(format!("cannot parse seed list '{text}'"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        if lo >= hi {
            return Err(usage(format!("empty seed range '{text}'")));
        }
        return Ok((lo..hi).collect());
    }
    text.split(',')
        .map(|part| part.trim().parse().map_err(|_| bad()))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, UsageError> {
    match command {
        Command::Validate { file, format } => cmd_validate(&file, format),
        Command::Run {
            file,
            input,
            world,
            seed,
            budget,
            trace,
            format,
        } => cmd_run(&file, &input, world.as_deref(), seed, budget, trace, format),
        Command::Quote { file, format } => cmd_quote(&file, format),
        Command::Unquote { quote, format } => cmd_unquote(&quote, format),
        Command::Trials {
            file,
            input,
            world,
            seeds,
            budget,
            sigfigs,
            format,
        } => cmd_trials(&file, &input, world.as_deref(), &seeds, budget, sigfigs, format),
        Command::Refute {
            candidate,
            world,
            true_temp,
            noise_sigma,
            seed,
            budget,
            format,
        } => cmd_refute(
            &candidate,
            world.as_deref(),
            true_temp,
            noise_sigma,
            seed,
            budget,
            format,
        ),
        Command::DemoHalting {
            candidate,
            budget,
            format,
        } => cmd_demo_halting(&candidate, budget, format),
    }
}

#[derive(Serialize)]
struct ValidateReport {
    machine: String,
    valid: bool,
    violations: Vec<String>,
}

fn cmd_validate(file: &Path, format: Format) -> Result<u8, UsageError> {
    let text = read_file(file)?;
    let (report, code) = match parse_dsl(&text) {
        Ok(m) => {
            let violations = m
                .validate()
                .violations
                .iter()
                .map(|v| v.message.clone())
                .collect();
            (
                ValidateReport {
                    machine: m.name.clone(),
                    valid: true,
                    violations,
                },
                0,
            )
        }
        Err(DslError::Invalid(validation)) => (
            ValidateReport {
                machine: String::new(),
                valid: false,
                violations: validation.violations.iter().map(|v| v.message.clone()).collect(),
            },
            1,
        ),
        Err(e @ DslError::Syntax { .. }) => {
            return Err(usage(format!("{}: {e}", file.display())))
        }
    };
    match format {
        Format::Json => {
            let mut inputs = BTreeMap::new();
            inputs.insert("machine".into(), digest(text.as_bytes()));
            emit(&Envelope {
                tool: "metra",
                version: env!("CARGO_PKG_VERSION"),
                command: "validate",
                seed: 0,
                budget: 100_000,
                inputs,
                report: &report,
            });
        }
        Format::Human => {
            if !report.machine.is_empty() {
                say!("machine     {}", report.machine);
            }
            say!("valid       {}", report.valid);
            for v in &report.violations {
                say!("violation   {v}");
            }
        }
    }
    Ok(code)
}

fn cmd_run(
    file: &Path,
    input: &str,
    world: Option<&Path>,
    seed: Option<u64>,
    budget: u64,
    trace: bool,
    format: Format,
) -> Result<u8, UsageError> {
    let (machine, text) = load_machine(file)?;
    let (config, mut inputs) = load_world(world)?;
    inputs.insert("machine".into(), digest(text.as_bytes()));
    let effective_seed = seed.or(config.seed).unwrap_or(0);
    let mut providers = build_provider_set(&config, effective_seed)
        .map_err(|e| usage(format!("world configuration: {e}")))?;
    let level = if trace { TraceLevel::Steps } else { TraceLevel::Off };
    let outcome = match run(
        &machine,
        input,
        &mut providers,
        &OracleSet::disabled(),
        budget,
        level,
    ) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(1);
        }
    };
    match format {
        Format::Json => emit(&Envelope {
            tool: "metra",
            version: env!("CARGO_PKG_VERSION"),
            command: "run",
            seed: effective_seed,
            budget,
            inputs,
            report: &outcome,
        }),
        Format::Human => {
            say!("machine     {}", machine.name);
            say!("status      {}", status_word(outcome.status));
            if let Some(r) = &outcome.result {
                say!("result      {r}");
            }
            if let Some(e) = &outcome.error {
                say!("error       {e}");
            }
            say!("steps       {}", outcome.steps);
            say!("seed        {effective_seed}");
            say!("budget      {budget}");
            if let Some(entries) = &outcome.trace {
                for t in entries {
                    say!("{:>8}  head {:<5} {}", t.step, t.head, t.instruction);
                }
            }
        }
    }
    Ok(0)
}

fn status_word(status: RunStatus) -> &'static str {
    match status {
        RunStatus::Halted => "halted",
        RunStatus::BudgetExhausted => "budget-exhausted",
        RunStatus::ExecutionError => "execution-error",
    }
}

#[derive(Serialize)]
struct QuoteReport {
    machine: String,
    quote: String,
}

fn cmd_quote(file: &Path, format: Format) -> Result<u8, UsageError> {
    let (machine, text) = load_machine(file)?;
    let q = quote(&machine);
    match format {
        Format::Json => {
            let mut inputs = BTreeMap::new();
            inputs.insert("machine".into(), digest(text.as_bytes()));
            emit(&Envelope {
                tool: "metra",
                version: env!("CARGO_PKG_VERSION"),
                command: "quote",
                seed: 0,
                budget: 100_000,
                inputs,
                report: QuoteReport {
                    machine: machine.name.clone(),
                    quote: q,
                },
            });
        }
        Format::Human => say!("{q}"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct UnquoteReport {
    text: String,
}

fn cmd_unquote(quoted: &str, format: Format) -> Result<u8, UsageError> {
    let machine = match unquote(quoted) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(1);
        }
    };
    let text = render_dsl(&machine);
    match format {
        Format::Json => {
            let mut inputs = BTreeMap::new();
            inputs.insert("quote".into(), digest(quoted.as_bytes()));
            emit(&Envelope {
                tool: "metra",
                version: env!("CARGO_PKG_VERSION"),
                command: "unquote",
                seed: 0,
                budget: 100_000,
                inputs,
                report: UnquoteReport { text },
            });
        }
        Format::Human => say!("{}", text.trim_end_matches('\n')),
    }
    Ok(0)
}

#[derive(Serialize)]
struct TruncationReport {
    sigfigs: usize,
    repeatable: bool,
    distinct_results: Vec<String>,
}

#[derive(Serialize)]
struct TrialsReport {
    machine: String,
    input: String,
    seeds: Vec<u64>,
    repeatable: bool,
    distinct_results: Vec<String>,
    truncation: Option<TruncationReport>,
    trials: Vec<Trial>,
}

fn cmd_trials(
    file: &Path,
    input: &str,
    world: Option<&Path>,
    seeds: &str,
    budget: u64,
    sigfigs: Option<usize>,
    format: Format,
) -> Result<u8, UsageError> {
    let (machine, text) = load_machine(file)?;
    let (config, mut inputs) = load_world(world)?;
    inputs.insert("machine".into(), digest(text.as_bytes()));
    let seed_list = parse_seeds(seeds)?;
    let set = run_trials(
        &machine,
        input,
        |seed| build_provider_set(&config, seed),
        &seed_list,
        budget,
    );
    let repeatable = metra_core::is_repeatable(&set);
    let distinct: Vec<String> = set.distinct_results().iter().map(|s| s.to_string()).collect();
    let truncation = match sigfigs {
        None => None,
        Some(n) => {
            let repeatable = metra_core::repeatable_after_truncation(&set, n)
                .map_err(|e| usage(format!("--sigfigs {n}: {e}")))?;
            let mut truncated: Vec<String> = Vec::new();
            for t in &set.trials {
                if let Some(r) = &t.outcome.result {
                    let cut = truncate_significant(r, n)
                        .map_err(|e| usage(format!("--sigfigs {n}: {e}")))?;
                    if !truncated.contains(&cut) {
                        truncated.push(cut);
                    }
                }
            }
            truncated.sort();
            Some(TruncationReport {
                sigfigs: n,
                repeatable,
                distinct_results: truncated,
            })
        }
    };
    let report = TrialsReport {
        machine: machine.name.clone(),
        input: input.to_string(),
        seeds: seed_list,
        repeatable,
        distinct_results: distinct,
        truncation,
        trials: set.trials,
    };
    match format {
        Format::Json => emit(&Envelope {
            tool: "metra",
            version: env!("CARGO_PKG_VERSION"),
            command: "trials",
            seed: report.seeds[0],
            budget,
            inputs,
            report: &report,
        }),
        Format::Human => {
            say!("machine     {}", report.machine);
            say!("trials      {}", report.trials.len());
            say!("repeatable  {}", report.repeatable);
            say!("distinct    {}", report.distinct_results.join(" "));
            if let Some(t) = &report.truncation {
                say!("sigfigs     {}", t.sigfigs);
                say!("repeatable  {} (truncated)", t.repeatable);
                say!("distinct    {} (truncated)", t.distinct_results.join(" "));
            }
            for trial in &report.trials {
                say!(
                    "{:>8}  {:<17} {}",
                    trial.seed,
                    status_word(trial.outcome.status),
                    trial.outcome.result.as_deref().unwrap_or("-")
                );
            }
        }
    }
    Ok(0)
}

fn cmd_refute(
    candidate: &str,
    world: Option<&Path>,
    true_temp: Option<f64>,
    noise_sigma: Option<f64>,
    seed: u64,
    budget: u64,
    format: Format,
) -> Result<u8, UsageError> {
    let (config, inputs) = load_world(world)?;
    let file_params = config.thermometer_params();
    let params = ThermometerParams {
        true_temp: true_temp
            .or(file_params.map(|p| p.true_temp))
            .unwrap_or(23.7),
        noise_sigma: noise_sigma
            .or(file_params.map(|p| p.noise_sigma))
            .unwrap_or(0.0),
    };
    let verifier = builtin_verifier(candidate, params)
        .ok_or_else(|| usage(format!("unknown candidate '{candidate}'")))?;
    let report = refute_verifier(verifier, params, seed, budget)
        .map_err(|e| usage(format!("world parameters: {e}")))?;
    let code = if report.contradiction { 0 } else { 1 };
    match format {
        Format::Json => emit(&Envelope {
            tool: "metra",
            version: env!("CARGO_PKG_VERSION"),
            command: "refute",
            seed,
            budget,
            inputs,
            report: &report,
        }),
        Format::Human => {
            for line in &report.transcript {
                say!("{line}");
            }
            say!("contradiction  {}", report.contradiction);
        }
    }
    Ok(code)
}

fn cmd_demo_halting(candidate: &str, budget: Option<u64>, format: Format) -> Result<u8, UsageError> {
    let decider = builtin_decider(candidate)
        .ok_or_else(|| usage(format!("unknown candidate '{candidate}'")))?;
    let budget = budget.unwrap_or_else(|| decider.budget().saturating_mul(10));
    let report = refute_halting_decider(decider, budget);
    let code = if report.contradiction { 0 } else { 1 };
    match format {
        Format::Json => emit(&Envelope {
            tool: "metra",
            version: env!("CARGO_PKG_VERSION"),
            command: "demo-halting",
            seed: 0,
            budget,
            inputs: BTreeMap::new(),
            report: &report,
        }),
        Format::Human => {
            for line in &report.transcript {
                say!("{line}");
            }
            say!("contradiction  {}", report.contradiction);
        }
    }
    Ok(code)
}
